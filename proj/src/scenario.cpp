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

#include <offgrid/scenario.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace offgrid
{
using nlohmann::json;

std::string_view to_string(Algorithm a)
{
    switch (a)
    {
    case Algorithm::DSOMP:
        return "DSOMP";
    case Algorithm::PPSOMP:
        return "PPSOMP";
    case Algorithm::DCOMP:
        return "DCOMP";
    case Algorithm::PPCOMP:
        return "PPCOMP";
    }
    return "?";
}

Algorithm algorithm_from_string(std::string_view name)
{
    for (Algorithm a : {Algorithm::DSOMP, Algorithm::PPSOMP, Algorithm::DCOMP, Algorithm::PPCOMP})
        if (to_string(a) == name)
            return a;
    throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

SolverOptions Scenario::effective_solver() const
{
    SolverOptions o = solver;
    o.k_max = effective_k_max();
    return o;
}

namespace
{
std::string join(const std::string &path, const std::string &key)
{
    return path.empty() ? key : path + "." + key;
}

void require(bool ok, const std::string &field, const std::string &message)
{
    if (!ok)
        throw ConfigError(field, message);
}

std::string_view scheme_name(GridScheme s)
{
    return s == GridScheme::UniformTheta ? "uniform_theta" : "uniform_cos";
}

std::string_view style_name(BeamformerStyle s)
{
    return s == BeamformerStyle::UnitModulusRandomPhase ? "unit_modulus" : "gaussian";
}

std::string_view gradient_name(GradientForm g)
{
    return g == GradientForm::Exact ? "exact" : "summed_residual";
}

std::string_view reference_name(CovarianceReference r)
{
    return r == CovarianceReference::Analytic ? "analytic" : "sample";
}

// Reads `key` of `obj` into `out` if present, with the JSON path used in errors.
template <class T>
void read(const json &obj, const char *key, const std::string &path, T &out)
{
    const auto it = obj.find(key);
    if (it == obj.end())
        return;
    try
    {
        out = it->get<T>();
    }
    catch (const json::exception &)
    {
        throw ConfigError(join(path, key), "has the wrong type");
    }
}

void reject_unknown(const json &obj, const std::string &path, std::initializer_list<const char *> keys)
{
    require(obj.is_object(), path.empty() ? "<root>" : path, "must be an object");
    for (const auto &[key, value] : obj.items())
    {
        bool known = false;
        for (const char *k : keys)
            known = known || key == k;
        if (!known)
            throw ConfigError(join(path, key), "unknown key");
    }
}

template <class Enum>
Enum read_enum(const json &obj, const char *key, const std::string &path, Enum current,
               std::initializer_list<std::pair<const char *, Enum>> names)
{
    std::string value;
    read(obj, key, path, value);
    if (value.empty())
        return current;
    for (const auto &[name, e] : names)
        if (value == name)
            return e;
    throw ConfigError(join(path, key), "unknown value '" + value + "'");
}
} // namespace

void validate(const Scenario &s)
{
    require(!s.id.empty(), "id", "must not be empty");
    require(s.id.find_first_of(",\"\r\n") == std::string::npos, "id", "must not contain commas, quotes or newlines");
    require(s.bs_antennas >= 1, "channel.bs_antennas", "must be >= 1");
    require(s.ue_antennas >= 1, "channel.ue_antennas", "must be >= 1");
    require(s.element_spacing > 0.0, "channel.element_spacing", "must be > 0");
    require(s.clusters >= 1, "channel.clusters", "must be >= 1");
    require(s.paths_per_cluster >= 1, "channel.paths_per_cluster", "must be >= 1");
    require(s.sigma_aoa_deg >= 0.0, "channel.sigma_aoa_deg", "must be >= 0");
    require(s.sigma_aod_deg >= 0.0, "channel.sigma_aod_deg", "must be >= 0");
    require(s.path_loss > 0.0, "channel.path_loss", "must be > 0");

    require(!s.rf_chains.empty(), "training.rf_chains", "must not be empty");
    for (std::size_t i = 0; i < s.rf_chains.size(); ++i)
    {
        const std::string f = "training.rf_chains[" + std::to_string(i) + "]";
        require(s.rf_chains[i].m_rf >= 1 && s.rf_chains[i].m_rf <= s.bs_antennas, f, "M_RF must be in [1, M]");
        require(s.rf_chains[i].n_rf >= 1 && s.rf_chains[i].n_rf <= s.ue_antennas, f, "N_RF must be in [1, N]");
    }
    require(!s.snapshots.empty(), "training.snapshots", "must not be empty");
    for (std::size_t i = 0; i < s.snapshots.size(); ++i)
        require(s.snapshots[i] >= 1, "training.snapshots[" + std::to_string(i) + "]", "must be >= 1");
    require(!s.snr_db.empty(), "training.snr_db", "must not be empty");
    for (std::size_t i = 0; i < s.snr_db.size(); ++i)
        require(std::isfinite(s.snr_db[i]), "training.snr_db[" + std::to_string(i) + "]", "must be finite");

    require(s.g_bs >= 2, "grid.g_bs", "must be >= 2");
    require(s.g_ue >= 2, "grid.g_ue", "must be >= 2");

    require(s.solver.epsilon > 0.0, "solver.epsilon", "must be > 0");
    require(s.effective_k_max() >= 1 && s.effective_k_max() <= s.g_bs * s.g_ue, "solver.k_max",
            "must be in [1, g_bs * g_ue]");
    require(s.solver.mu0 > 0.0, "solver.mu0", "must be > 0");
    require(s.solver.p_max >= 1, "solver.p_max", "must be >= 1");
    require(s.solver.tol_step > 0.0, "solver.tol_step", "must be > 0");
    require(s.solver.tol_objective >= 0.0, "solver.tol_objective", "must be >= 0");
    require(s.solver.max_halvings >= 1, "solver.max_halvings", "must be >= 1");

    require(!s.algorithms.empty(), "algorithms", "must not be empty");
    require(s.effective_metric_rank() <= s.bs_antennas * s.ue_antennas, "metric_rank", "must be <= M * N");
    require(s.trials >= 1, "trials", "must be >= 1");
}

Scenario parse_scenario(std::string_view json_text)
{
    json root;
    try
    {
        root = json::parse(json_text);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    reject_unknown(root, "", {"id", "channel", "training", "grid", "solver", "algorithms", "metric_rank",
                              "covariance_reference", "trials", "seed"});

    Scenario s;
    read(root, "id", "", s.id);

    if (root.contains("channel"))
    {
        const json &c = root["channel"];
        reject_unknown(c, "channel", {"bs_antennas", "ue_antennas", "element_spacing", "clusters", "paths_per_cluster",
                                      "sigma_aoa_deg", "sigma_aod_deg", "path_loss"});
        read(c, "bs_antennas", "channel", s.bs_antennas);
        read(c, "ue_antennas", "channel", s.ue_antennas);
        read(c, "element_spacing", "channel", s.element_spacing);
        read(c, "clusters", "channel", s.clusters);
        read(c, "paths_per_cluster", "channel", s.paths_per_cluster);
        read(c, "sigma_aoa_deg", "channel", s.sigma_aoa_deg);
        read(c, "sigma_aod_deg", "channel", s.sigma_aod_deg);
        read(c, "path_loss", "channel", s.path_loss);
    }

    if (root.contains("training"))
    {
        const json &t = root["training"];
        reject_unknown(t, "training", {"rf_chains", "snapshots", "snr_db", "beamformer_style"});
        if (t.contains("rf_chains"))
        {
            std::vector<std::vector<int>> pairs;
            read(t, "rf_chains", "training", pairs);
            s.rf_chains.clear();
            for (std::size_t i = 0; i < pairs.size(); ++i)
            {
                require(pairs[i].size() == 2, "training.rf_chains[" + std::to_string(i) + "]",
                        "must be a [M_RF, N_RF] pair");
                s.rf_chains.push_back({pairs[i][0], pairs[i][1]});
            }
        }
        read(t, "snapshots", "training", s.snapshots);
        read(t, "snr_db", "training", s.snr_db);
        s.beamformer_style = read_enum(t, "beamformer_style", "training", s.beamformer_style,
                                       {{"unit_modulus", BeamformerStyle::UnitModulusRandomPhase},
                                        {"gaussian", BeamformerStyle::GaussianNormalized}});
    }

    if (root.contains("grid"))
    {
        const json &g = root["grid"];
        reject_unknown(g, "grid", {"scheme", "g_bs", "g_ue"});
        s.grid_scheme = read_enum(g, "scheme", "grid", s.grid_scheme,
                                  {{"uniform_cos", GridScheme::UniformCosTheta},
                                   {"uniform_theta", GridScheme::UniformTheta}});
        read(g, "g_bs", "grid", s.g_bs);
        read(g, "g_ue", "grid", s.g_ue);
    }

    if (root.contains("solver"))
    {
        const json &o = root["solver"];
        reject_unknown(o, "solver", {"epsilon", "k_max", "mu0", "p_max", "tol_step", "tol_objective",
                                     "max_halvings", "perturbation_enabled", "gradient_form"});
        read(o, "epsilon", "solver", s.solver.epsilon);
        read(o, "k_max", "solver", s.solver.k_max);
        read(o, "mu0", "solver", s.solver.mu0);
        read(o, "p_max", "solver", s.solver.p_max);
        read(o, "tol_step", "solver", s.solver.tol_step);
        read(o, "tol_objective", "solver", s.solver.tol_objective);
        read(o, "max_halvings", "solver", s.solver.max_halvings);
        read(o, "perturbation_enabled", "solver", s.solver.perturbation_enabled);
        s.solver.gradient_form =
            read_enum(o, "gradient_form", "solver", s.solver.gradient_form,
                      {{"exact", GradientForm::Exact}, {"summed_residual", GradientForm::SummedResidual}});
    }

    if (root.contains("algorithms"))
    {
        std::vector<std::string> names;
        read(root, "algorithms", "", names);
        s.algorithms.clear();
        for (std::size_t i = 0; i < names.size(); ++i)
        {
            try
            {
                s.algorithms.push_back(algorithm_from_string(names[i]));
            }
            catch (const std::invalid_argument &e)
            {
                throw ConfigError("algorithms[" + std::to_string(i) + "]", e.what());
            }
        }
    }
    read(root, "metric_rank", "", s.metric_rank);
    s.covariance_reference = read_enum(root, "covariance_reference", "", s.covariance_reference,
                                       {{"analytic", CovarianceReference::Analytic},
                                        {"sample", CovarianceReference::Sample}});
    read(root, "trials", "", s.trials);
    read(root, "seed", "", s.seed);

    validate(s);
    return s;
}

Scenario load_scenario(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("<file>", "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string dump_scenario(const Scenario &s)
{
    json rf = json::array();
    for (const RfChains &r : s.rf_chains)
        rf.push_back({r.m_rf, r.n_rf});
    json algorithms = json::array();
    for (Algorithm a : s.algorithms)
        algorithms.push_back(to_string(a));

    json root = {
        {"id", s.id},
        {"channel",
         {{"bs_antennas", s.bs_antennas},
          {"ue_antennas", s.ue_antennas},
          {"element_spacing", s.element_spacing},
          {"clusters", s.clusters},
          {"paths_per_cluster", s.paths_per_cluster},
          {"sigma_aoa_deg", s.sigma_aoa_deg},
          {"sigma_aod_deg", s.sigma_aod_deg},
          {"path_loss", s.path_loss}}},
        {"training",
         {{"rf_chains", rf},
          {"snapshots", s.snapshots},
          {"snr_db", s.snr_db},
          {"beamformer_style", style_name(s.beamformer_style)}}},
        {"grid", {{"scheme", scheme_name(s.grid_scheme)}, {"g_bs", s.g_bs}, {"g_ue", s.g_ue}}},
        {"solver",
         {{"epsilon", s.solver.epsilon},
          {"k_max", s.solver.k_max},
          {"mu0", s.solver.mu0},
          {"p_max", s.solver.p_max},
          {"tol_step", s.solver.tol_step},
          {"tol_objective", s.solver.tol_objective},
          {"max_halvings", s.solver.max_halvings},
          {"perturbation_enabled", s.solver.perturbation_enabled},
          {"gradient_form", gradient_name(s.solver.gradient_form)}}},
        {"algorithms", algorithms},
        {"metric_rank", s.metric_rank},
        {"covariance_reference", reference_name(s.covariance_reference)},
        {"trials", s.trials},
        {"seed", s.seed},
    };
    return root.dump(2) + "\n";
}

std::vector<Scenario> figure_preset(int figure)
{
    const std::vector<int> snapshot_axis{1, 5, 10, 20, 30, 40, 50};
    Scenario base;
    base.snapshots = snapshot_axis;
    base.snr_db = {10.0};
    base.rf_chains = {{5, 6}};

    switch (figure)
    {
    case 2: {
        // NMSE-H vs snapshots for four measurement budgets
        Scenario s = base;
        s.id = "fig2";
        s.rf_chains = {{4, 5}, {5, 6}, {5, 8}, {10, 5}};
        s.algorithms = {Algorithm::DSOMP, Algorithm::PPSOMP};
        return {s};
    }
    case 3:
    case 4: {
        // eta (3) and NMSE-C (4) for all four estimators
        Scenario s = base;
        s.id = figure == 3 ? "fig3" : "fig4";
        return {s};
    }
    case 5: {
        // sampling scheme, perturbed estimators only
        Scenario cos = base;
        cos.id = "fig5_uniform_cos";
        cos.algorithms = {Algorithm::PPSOMP, Algorithm::PPCOMP};
        Scenario theta = cos;
        theta.id = "fig5_uniform_theta";
        theta.grid_scheme = GridScheme::UniformTheta;
        return {cos, theta};
    }
    case 6: {
        // grid size: PPCOMP on 16 points against DCOMP on growing grids
        std::vector<Scenario> out;
        Scenario pp = base;
        pp.id = "fig6_ppcomp_g16";
        pp.algorithms = {Algorithm::PPCOMP};
        out.push_back(pp);
        for (int g : {16, 24, 32, 48})
        {
            Scenario d = base;
            d.id = "fig6_dcomp_g" + std::to_string(g);
            d.algorithms = {Algorithm::DCOMP};
            d.g_bs = g;
            d.g_ue = g;
            out.push_back(d);
        }
        return out;
    }
    case 7: {
        // SNR sweep at three snapshot counts
        Scenario s = base;
        s.id = "fig7";
        s.snapshots = {1, 10, 40};
        s.snr_db = {-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
        s.algorithms = {Algorithm::DCOMP, Algorithm::PPCOMP};
        return {s};
    }
    case 8: {
        // measurement budget sweep
        Scenario s = base;
        s.id = "fig8";
        s.rf_chains = {{4, 5}, {5, 6}, {5, 8}};
        s.algorithms = {Algorithm::DCOMP, Algorithm::PPCOMP};
        return {s};
    }
    case 9: {
        // array size with the RF budget fixed at 30
        std::vector<Scenario> out;
        for (auto [m, n] : {std::pair{16, 8}, std::pair{24, 12}, std::pair{32, 16}})
        {
            Scenario s = base;
            s.id = "fig9_m" + std::to_string(m) + "_n" + std::to_string(n);
            s.bs_antennas = m;
            s.ue_antennas = n;
            s.algorithms = {Algorithm::DCOMP, Algorithm::PPCOMP};
            out.push_back(s);
        }
        return out;
    }
    default:
        throw ConfigError("figure", "no preset for figure " + std::to_string(figure) + " (expected 2..9)");
    }
}
} // namespace offgrid
