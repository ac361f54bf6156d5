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

#ifndef OFFGRID_SCENARIO_HPP
#define OFFGRID_SCENARIO_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <offgrid/dictionary.hpp>
#include <offgrid/estimators.hpp>
#include <offgrid/sensing.hpp>

namespace offgrid
{
enum class Algorithm
{
    DSOMP,
    PPSOMP,
    DCOMP,
    PPCOMP,
};

std::string_view to_string(Algorithm a);
Algorithm algorithm_from_string(std::string_view name);

enum class CovarianceReference
{
    Analytic, // expectation over the gains, angles fixed
    Sample,   // (1/T) sum_t h_t h_t^H of the simulated snapshots
};

struct RfChains
{
    int m_rf = 5;
    int n_rf = 6;

    int product() const { return m_rf * n_rf; }
    bool operator==(const RfChains &) const = default;
};

/// Invalid configuration; `field` is the JSON path of the offending value.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(std::string field, const std::string &message)
        : std::runtime_error(field + ": " + message), field_(std::move(field))
    {
    }
    const std::string &field() const { return field_; }

private:
    std::string field_;
};

struct Scenario
{
    std::string id = "default";

    // channel
    int bs_antennas = 16;
    int ue_antennas = 8;
    double element_spacing = 0.5;
    int clusters = 4;
    int paths_per_cluster = 2;
    double sigma_aoa_deg = 20.0;
    double sigma_aod_deg = 20.0;
    double path_loss = 1.0;

    // training, every combination of the three lists is a sweep point
    std::vector<RfChains> rf_chains{{5, 6}};
    std::vector<int> snapshots{1, 5, 10, 20, 30, 40, 50};
    std::vector<double> snr_db{10.0};
    BeamformerStyle beamformer_style = BeamformerStyle::UnitModulusRandomPhase;

    // grid
    GridScheme grid_scheme = GridScheme::UniformCosTheta;
    int g_bs = 16;
    int g_ue = 16;

    SolverOptions solver = [] {
        SolverOptions o;
        o.k_max = 0; // <= 0 means 2 * K * L
        return o;
    }();

    std::vector<Algorithm> algorithms{Algorithm::DSOMP, Algorithm::PPSOMP, Algorithm::DCOMP, Algorithm::PPCOMP};
    int metric_rank = 0; // <= 0 means K
    CovarianceReference covariance_reference = CovarianceReference::Analytic;
    int trials = 100;
    std::uint64_t seed = 1;

    int effective_k_max() const { return solver.k_max > 0 ? solver.k_max : 2 * clusters * paths_per_cluster; }
    int effective_metric_rank() const { return metric_rank > 0 ? metric_rank : clusters; }
    SolverOptions effective_solver() const;
};

/// Throws ConfigError naming the first invalid field.
void validate(const Scenario &scenario);

Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::string &path);
std::string dump_scenario(const Scenario &scenario);

/// Bundled presets for the figure sweeps (2..9). Figures with several curves
/// that differ in grid or array settings return one scenario per curve.
std::vector<Scenario> figure_preset(int figure);
} // namespace offgrid

#endif
