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

#ifndef OFFGRID_HARNESS_HPP
#define OFFGRID_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <offgrid/channel_model.hpp>
#include <offgrid/dictionary.hpp>
#include <offgrid/scenario.hpp>
#include <offgrid/sensing.hpp>

namespace offgrid
{
struct SweepPoint
{
    RfChains rf;
    int snapshots = 1;
    double snr_db = 10.0;
};

// Row-major over (rf_chains, snr_db, snapshots), in the order listed in the scenario.
std::vector<SweepPoint> sweep_points(const Scenario &scenario);

struct ResultRow
{
    std::string scenario_id;
    std::string algorithm;
    int snapshots = 0;
    double snr_db = 0.0;
    int mrf_nrf = 0;
    int trial = 0;
    double nmse_h = 0.0; // nan for the covariance estimators
    double nmse_c = 0.0;
    double eta = 0.0;
    double wall_ms = 0.0;
    int support_size = 0;
};

/// Everything random about one trial at one sweep point. All algorithms of the
/// trial consume the same instance.
struct TrialData
{
    PathSet paths;
    ChannelRealization channel;
    SensingBlock sensing;
    CMat r_true; // covariance reference for nmse_c and eta
};

TrialData simulate_trial(const Scenario &scenario, const SweepPoint &point, int trial);

/// Runs every algorithm of the scenario on `data`, one row each.
std::vector<ResultRow> evaluate_algorithms(const Scenario &scenario, const Dictionary &dict, const TrialData &data,
                                           const SweepPoint &point, int trial, bool timing = true);

struct RunOptions
{
    int threads = 0;     // 0 leaves the OpenMP default
    bool timing = true;  // false writes wall_ms = 0 so repeated runs are byte-identical
};

/// Monte Carlo over every (sweep point, trial). Units run concurrently and are
/// merged in (point, trial, algorithm) order, so the rows do not depend on the
/// thread count.
std::vector<ResultRow> run_scenario(const Scenario &scenario, const RunOptions &options = {});

struct SummaryRow
{
    std::string scenario_id;
    std::string algorithm;
    int snapshots = 0;
    double snr_db = 0.0;
    int mrf_nrf = 0;
    int trials = 0;
    double nmse_h_mean = 0.0, nmse_h_std = 0.0;
    double nmse_c_mean = 0.0, nmse_c_std = 0.0;
    double eta_mean = 0.0, eta_std = 0.0;
    double wall_ms_mean = 0.0;
    double support_size_mean = 0.0;
};

/// Mean and sample standard deviation per (scenario, algorithm, point), first-seen order.
std::vector<SummaryRow> summarize(const std::vector<ResultRow> &rows);

inline constexpr const char *kCsvHeader =
    "scenario_id,algorithm,T,snr_db,mrf_nrf,trial,nmse_h,nmse_c,eta,wall_ms,support_size";

void write_csv(std::ostream &out, const std::vector<ResultRow> &rows);
void write_csv(const std::string &path, const std::vector<ResultRow> &rows);
std::vector<ResultRow> read_csv(std::istream &in);
void write_summary_csv(std::ostream &out, const std::vector<SummaryRow> &rows);
} // namespace offgrid

#endif
