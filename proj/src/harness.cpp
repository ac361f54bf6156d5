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

#include <offgrid/harness.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <omp.h>

#include <offgrid/estimators.hpp>
#include <offgrid/metrics.hpp>
#include <offgrid/rng.hpp>

namespace offgrid
{
std::vector<SweepPoint> sweep_points(const Scenario &scenario)
{
    std::vector<SweepPoint> out;
    for (const RfChains &rf : scenario.rf_chains)
        for (double snr : scenario.snr_db)
            for (int t : scenario.snapshots)
                out.push_back({rf, t, snr});
    return out;
}

TrialData simulate_trial(const Scenario &scenario, const SweepPoint &point, int trial)
{
    const ArrayGeometry bs(scenario.bs_antennas, scenario.element_spacing);
    const ArrayGeometry ue(scenario.ue_antennas, scenario.element_spacing);

    ChannelParams params;
    params.clusters = scenario.clusters;
    params.paths_per_cluster = scenario.paths_per_cluster;
    params.sigma_aoa = scenario.sigma_aoa_deg * kPi / 180.0;
    params.sigma_aod = scenario.sigma_aod_deg * kPi / 180.0;
    params.snapshots = point.snapshots;
    params.path_loss = scenario.path_loss;

    TrainingConfig cfg;
    cfg.m_rf = point.rf.m_rf;
    cfg.n_rf = point.rf.n_rf;
    cfg.frames = point.snapshots;
    cfg.noise_variance = noise_variance_from_snr_db(point.snr_db);
    cfg.style = scenario.beamformer_style;

    const auto t = static_cast<std::uint64_t>(trial);
    Rng path_rng = make_rng(scenario.seed, t, Stream::Paths);
    Rng gain_rng = make_rng(scenario.seed, t, Stream::Gains);
    Rng beam_rng = make_rng(scenario.seed, t, Stream::Beamformers);
    Rng noise_rng = make_rng(scenario.seed, t, Stream::Noise);

    PathSet paths = draw_paths(params, path_rng);
    ChannelRealization channel = synthesize_channel(paths, draw_gains(params, gain_rng), params.path_loss, bs, ue);
    const Beamformers beams = draw_beamformers(cfg, bs, ue, beam_rng);
    SensingBlock sensing = measure(channel, beams, cfg, bs, ue, noise_rng);
    CMat r_true = scenario.covariance_reference == CovarianceReference::Analytic
                      ? true_covariance(paths, params.path_loss, bs, ue)
                      : sample_covariance(channel);
    return TrialData{std::move(paths), std::move(channel), std::move(sensing), std::move(r_true)};
}

namespace
{
bool is_channel_estimator(Algorithm a) { return a == Algorithm::DSOMP || a == Algorithm::PPSOMP; }
bool is_perturbed(Algorithm a) { return a == Algorithm::PPSOMP || a == Algorithm::PPCOMP; }
} // namespace

std::vector<ResultRow> evaluate_algorithms(const Scenario &scenario, const Dictionary &dict, const TrialData &data,
                                           const SweepPoint &point, int trial, bool timing)
{
    const int rank = scenario.effective_metric_rank();
    std::vector<ResultRow> rows;
    for (Algorithm a : scenario.algorithms)
    {
        SolverOptions opts = scenario.effective_solver();
        if (!is_perturbed(a))
            opts.perturbation_enabled = false;

        ResultRow row;
        row.scenario_id = scenario.id;
        row.algorithm = std::string(to_string(a));
        row.snapshots = point.snapshots;
        row.snr_db = point.snr_db;
        row.mrf_nrf = point.rf.product();
        row.trial = trial;

        const auto start = std::chrono::steady_clock::now();
        CMat r_hat;
        if (is_channel_estimator(a))
        {
            const ChannelEstimate est = ppsomp(data.sensing, dict, opts);
            const auto stop = std::chrono::steady_clock::now();
            row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
            std::vector<CMat> h_hat;
            h_hat.reserve(est.h_hat.size());
            for (const CVec &h : est.h_hat)
                h_hat.push_back(h.reshaped(scenario.ue_antennas, scenario.bs_antennas));
            row.nmse_h = nmse_h(data.channel.H, h_hat);
            row.support_size = static_cast<int>(est.support.size());
            r_hat = indirect_covariance(est);
        }
        else
        {
            const CovarianceEstimate est = ppcomp(data.sensing, dict, opts);
            const auto stop = std::chrono::steady_clock::now();
            row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
            row.nmse_h = std::nan("");
            row.support_size = static_cast<int>(est.support.size());
            r_hat = est.r_hat;
        }
        if (!timing)
            row.wall_ms = 0.0;
        row.nmse_c = nmse_c(data.r_true, r_hat);
        row.eta = relative_efficiency(data.r_true, r_hat, rank);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ResultRow> run_scenario(const Scenario &scenario, const RunOptions &options)
{
    validate(scenario);
    const std::vector<SweepPoint> points = sweep_points(scenario);
    const ArrayGeometry bs(scenario.bs_antennas, scenario.element_spacing);
    const ArrayGeometry ue(scenario.ue_antennas, scenario.element_spacing);
    const Dictionary dict(build_grid(scenario.grid_scheme, scenario.g_bs, scenario.g_ue), bs, ue);

    const long units = static_cast<long>(points.size()) * scenario.trials;
    std::vector<std::vector<ResultRow>> slots(static_cast<std::size_t>(units));
    std::exception_ptr failure;

    const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long u = 0; u < units; ++u)
    {
        try
        {
            const SweepPoint &point = points[static_cast<std::size_t>(u / scenario.trials)];
            const int trial = static_cast<int>(u % scenario.trials);
            const TrialData data = simulate_trial(scenario, point, trial);
            slots[static_cast<std::size_t>(u)] = evaluate_algorithms(scenario, dict, data, point, trial, options.timing);
        }
        catch (...)
        {
#pragma omp critical(offgrid_run_failure)
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);

    std::vector<ResultRow> rows;
    rows.reserve(static_cast<std::size_t>(units) * scenario.algorithms.size());
    for (auto &slot : slots)
        for (auto &row : slot)
            rows.push_back(std::move(row));
    return rows;
}

namespace
{
struct Accumulator
{
    std::vector<double> nmse_h, nmse_c, eta, wall_ms, support;
};

double mean(const std::vector<double> &v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double> &v)
{
    if (v.size() < 2)
        return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v)
        s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string format_g9(double x)
{
    if (std::isnan(x))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}
} // namespace

std::vector<SummaryRow> summarize(const std::vector<ResultRow> &rows)
{
    using Key = std::tuple<std::string, std::string, int, double, int>;
    std::vector<Key> order;
    std::map<Key, Accumulator> acc;
    for (const ResultRow &r : rows)
    {
        const Key key{r.scenario_id, r.algorithm, r.snapshots, r.snr_db, r.mrf_nrf};
        auto [it, inserted] = acc.try_emplace(key);
        if (inserted)
            order.push_back(key);
        it->second.nmse_h.push_back(r.nmse_h);
        it->second.nmse_c.push_back(r.nmse_c);
        it->second.eta.push_back(r.eta);
        it->second.wall_ms.push_back(r.wall_ms);
        it->second.support.push_back(r.support_size);
    }

    std::vector<SummaryRow> out;
    for (const Key &key : order)
    {
        const Accumulator &a = acc.at(key);
        SummaryRow s;
        std::tie(s.scenario_id, s.algorithm, s.snapshots, s.snr_db, s.mrf_nrf) = key;
        s.trials = static_cast<int>(a.eta.size());
        s.nmse_h_mean = mean(a.nmse_h);
        s.nmse_h_std = stddev(a.nmse_h);
        s.nmse_c_mean = mean(a.nmse_c);
        s.nmse_c_std = stddev(a.nmse_c);
        s.eta_mean = mean(a.eta);
        s.eta_std = stddev(a.eta);
        s.wall_ms_mean = mean(a.wall_ms);
        s.support_size_mean = mean(a.support);
        out.push_back(s);
    }
    return out;
}

void write_csv(std::ostream &out, const std::vector<ResultRow> &rows)
{
    out << kCsvHeader << '\n';
    for (const ResultRow &r : rows)
        out << r.scenario_id << ',' << r.algorithm << ',' << r.snapshots << ',' << format_g9(r.snr_db) << ','
            << r.mrf_nrf << ',' << r.trial << ',' << format_g9(r.nmse_h) << ',' << format_g9(r.nmse_c) << ','
            << format_g9(r.eta) << ',' << format_g9(r.wall_ms) << ',' << r.support_size << '\n';
}

void write_csv(const std::string &path, const std::vector<ResultRow> &rows)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_csv(out, rows);
    if (!out)
        throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<ResultRow> read_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error("read_csv: missing or unexpected header");

    std::vector<ResultRow> rows;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            f.push_back(cell);
        if (f.size() != 11)
            throw std::runtime_error("read_csv: expected 11 fields in '" + line + "'");
        ResultRow r;
        r.scenario_id = f[0];
        r.algorithm = f[1];
        r.snapshots = std::stoi(f[2]);
        r.snr_db = std::strtod(f[3].c_str(), nullptr);
        r.mrf_nrf = std::stoi(f[4]);
        r.trial = std::stoi(f[5]);
        r.nmse_h = std::strtod(f[6].c_str(), nullptr);
        r.nmse_c = std::strtod(f[7].c_str(), nullptr);
        r.eta = std::strtod(f[8].c_str(), nullptr);
        r.wall_ms = std::strtod(f[9].c_str(), nullptr);
        r.support_size = std::stoi(f[10]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_summary_csv(std::ostream &out, const std::vector<SummaryRow> &rows)
{
    out << "scenario_id,algorithm,T,snr_db,mrf_nrf,trials,nmse_h_mean,nmse_h_std,nmse_c_mean,nmse_c_std,"
           "eta_mean,eta_std,wall_ms_mean,support_size_mean\n";
    for (const SummaryRow &s : rows)
        out << s.scenario_id << ',' << s.algorithm << ',' << s.snapshots << ',' << format_g9(s.snr_db) << ','
            << s.mrf_nrf << ',' << s.trials << ',' << format_g9(s.nmse_h_mean) << ',' << format_g9(s.nmse_h_std)
            << ',' << format_g9(s.nmse_c_mean) << ',' << format_g9(s.nmse_c_std) << ',' << format_g9(s.eta_mean)
            << ',' << format_g9(s.eta_std) << ',' << format_g9(s.wall_ms_mean) << ','
            << format_g9(s.support_size_mean) << '\n';
}
} // namespace offgrid
