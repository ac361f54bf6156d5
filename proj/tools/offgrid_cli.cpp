// SPDX-License-Identifier: Apache-2.0
//
// offgrid: off-grid aware channel and covariance estimation for hybrid mmWave MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <offgrid/harness.hpp>
#include <offgrid/scenario.hpp>

namespace
{
struct Common
{
    std::string out;
    std::string summary;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    bool no_timing = false;
};

void add_common(CLI::App &cmd, Common &c)
{
    cmd.add_option("--out", c.out, "CSV output path (default: stdout)");
    cmd.add_option("--summary", c.summary, "Also write per-point mean/std to this CSV");
    cmd.add_option("--trials", c.trials, "Override the scenario trial count")->check(CLI::PositiveNumber);
    cmd.add_option("--threads", c.threads, "OpenMP threads over trials (0 = runtime default)")
        ->check(CLI::NonNegativeNumber);
    cmd.add_option("--seed", c.seed, "Override the base seed");
    cmd.add_flag("--no-timing", c.no_timing, "Write wall_ms = 0 for byte-reproducible output");
}

void apply_overrides(offgrid::Scenario &s, const Common &c)
{
    if (c.trials)
        s.trials = *c.trials;
    if (c.seed)
        s.seed = *c.seed;
    offgrid::validate(s);
}

void run_all(std::vector<offgrid::Scenario> scenarios, const Common &c)
{
    offgrid::RunOptions options;
    options.threads = c.threads;
    options.timing = !c.no_timing;

    std::vector<offgrid::ResultRow> rows;
    for (offgrid::Scenario &s : scenarios)
    {
        apply_overrides(s, c);
        std::cerr << "running " << s.id << " (" << s.trials << " trials)\n";
        auto part = offgrid::run_scenario(s, options);
        rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }

    if (c.out.empty())
        offgrid::write_csv(std::cout, rows);
    else
        offgrid::write_csv(c.out, rows);

    if (!c.summary.empty())
    {
        std::ofstream out(c.summary);
        if (!out)
            throw std::runtime_error("cannot open '" + c.summary + "' for writing");
        offgrid::write_summary_csv(out, offgrid::summarize(rows));
    }
}
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Off-grid channel and covariance estimation experiments"};
    app.require_subcommand(1);

    Common common;

    std::string run_file;
    CLI::App *run = app.add_subcommand("run", "Run a scenario file");
    run->add_option("scenario", run_file, "Scenario JSON file")->required();
    add_common(*run, common);

    int figure = 0;
    CLI::App *sweep = app.add_subcommand("sweep", "Run the bundled preset of a figure");
    sweep->add_option("--figure", figure, "Figure number")->required()->check(CLI::Range(2, 9));
    add_common(*sweep, common);

    std::string validate_file;
    CLI::App *validate = app.add_subcommand("validate", "Check a scenario file and print it with defaults filled in");
    validate->add_option("scenario", validate_file, "Scenario JSON file")->required();

    int defaults_figure = 0;
    std::string defaults_dir;
    CLI::App *defaults =
        app.add_subcommand("defaults", "Print the default scenario, or write a figure preset as scenario files");
    defaults->add_option("--figure", defaults_figure, "Figure preset to write")->check(CLI::Range(2, 9));
    defaults->add_option("--dir", defaults_dir, "Directory for the preset files (default: stdout)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        if (*run)
            run_all({offgrid::load_scenario(run_file)}, common);
        else if (*sweep)
            run_all(offgrid::figure_preset(figure), common);
        else if (*validate)
            std::cout << offgrid::dump_scenario(offgrid::load_scenario(validate_file));
        else if (*defaults)
        {
            const std::vector<offgrid::Scenario> scenarios =
                defaults_figure == 0 ? std::vector<offgrid::Scenario>{offgrid::Scenario{}}
                                     : offgrid::figure_preset(defaults_figure);
            for (const offgrid::Scenario &s : scenarios)
            {
                if (defaults_dir.empty())
                {
                    std::cout << offgrid::dump_scenario(s);
                    continue;
                }
                std::filesystem::create_directories(defaults_dir);
                const std::filesystem::path path = std::filesystem::path(defaults_dir) / (s.id + ".json");
                std::ofstream(path) << offgrid::dump_scenario(s);
                std::cerr << "wrote " << path.string() << "\n";
            }
        }
    }
    catch (const offgrid::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
