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

#ifndef OFFGRID_TEST_FIXTURES_HPP
#define OFFGRID_TEST_FIXTURES_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/QR>

#include <offgrid/channel_model.hpp>
#include <offgrid/dictionary.hpp>
#include <offgrid/estimators.hpp>
#include <offgrid/rng.hpp>
#include <offgrid/sensing.hpp>

namespace offgrid::test
{
inline CMat random_matrix(Index rows, Index cols, Rng &rng)
{
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    CMat m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
        {
            const double re = n(rng);
            const double im = n(rng);
            m(i, j) = cd(re, im);
        }
    return m;
}

inline CMat random_psd(Index dim, Index rank, Rng &rng)
{
    const CMat x = random_matrix(dim, rank, rng);
    return x * x.adjoint();
}

inline double uniform(double lo, double hi, Rng &rng) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Default-sized noiseless or noisy block built from explicit paths and gains.
struct Link
{
    ArrayGeometry bs{16};
    ArrayGeometry ue{8};
    TrainingConfig cfg;
    PathSet paths;
    ChannelRealization channel;
    SensingBlock sensing;
};

inline Link make_link(const PathSet &paths, const CMat &gains, const TrainingConfig &cfg, std::uint64_t seed,
                      ArrayGeometry bs = ArrayGeometry(16), ArrayGeometry ue = ArrayGeometry(8))
{
    Rng beam_rng(seed);
    Rng noise_rng(seed + 1);
    ChannelRealization channel = synthesize_channel(paths, gains, 1.0, bs, ue);
    const Beamformers beams = draw_beamformers(cfg, bs, ue, beam_rng);
    SensingBlock sensing = measure(channel, beams, cfg, bs, ue, noise_rng);
    return Link{bs, ue, cfg, paths, std::move(channel), std::move(sensing)};
}

inline TrainingConfig training(int frames, int m_rf = 5, int n_rf = 6, double noise_variance = 0.0)
{
    TrainingConfig cfg;
    cfg.m_rf = m_rf;
    cfg.n_rf = n_rf;
    cfg.frames = frames;
    cfg.noise_variance = noise_variance;
    return cfg;
}

inline CMat random_gains(int frames, int paths, Rng &rng) { return random_matrix(frames, paths, rng); }

/// Support entries at random interior grid cells with offsets inside their cells.
inline std::vector<SupportEntry> random_support(const Grid &grid, int k, Rng &rng)
{
    std::vector<SupportEntry> support;
    std::uniform_int_distribution<int> rx(1, grid.g_ue() - 2), tx(1, grid.g_bs() - 2);
    while (static_cast<int>(support.size()) < k)
    {
        SupportEntry e = make_support_entry(grid, rx(rng), tx(rng));
        bool duplicate = false;
        for (const SupportEntry &s : support)
            duplicate = duplicate || (s.aoa_index == e.aoa_index && s.aod_index == e.aod_index);
        if (duplicate)
            continue;
        e.delta_aoa = uniform(0.8 * e.aoa_bounds.lower, 0.8 * e.aoa_bounds.upper, rng);
        e.delta_aod = uniform(0.8 * e.aod_bounds.lower, 0.8 * e.aod_bounds.upper, rng);
        support.push_back(e);
    }
    return support;
}
/// Single-vector OMP on a sensed dictionary, written independently of the solver.
inline std::vector<Index> reference_omp(const CMat &A, const CVec &y, double epsilon, int k_max)
{
    std::vector<Index> support;
    CVec r = y;
    const double total = y.squaredNorm();
    while (static_cast<int>(support.size()) < k_max && r.squaredNorm() > epsilon * total)
    {
        Index best = -1;
        double best_score = -1.0;
        for (Index j = 0; j < A.cols(); ++j)
        {
            if (std::find(support.begin(), support.end(), j) != support.end())
                continue;
            const double score = std::abs(A.col(j).dot(r));
            if (score > best_score)
            {
                best_score = score;
                best = j;
            }
        }
        support.push_back(best);
        CMat B(A.rows(), static_cast<Index>(support.size()));
        for (std::size_t i = 0; i < support.size(); ++i)
            B.col(static_cast<Index>(i)) = A.col(support[i]);
        r = y - B * B.colPivHouseholderQr().solve(y);
    }
    return support;
}
} // namespace offgrid::test

#endif
