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

#include <offgrid/dictionary.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace offgrid
{
std::vector<double> grid_angles(GridScheme scheme, int count)
{
    if (count < 2)
        throw std::invalid_argument("build_grid: grid size must be >= 2");
    std::vector<double> angles(count);
    const double g = static_cast<double>(count);
    for (int i = 0; i < count; ++i)
    {
        if (scheme == GridScheme::UniformTheta)
            angles[i] = i * kPi / g;
        else
            angles[i] = std::acos(1.0 - 2.0 * i / g);
    }
    std::sort(angles.begin(), angles.end());
    return angles;
}

Grid build_grid(GridScheme scheme, int g_bs, int g_ue)
{
    Grid grid;
    grid.scheme = scheme;
    grid.aod = grid_angles(scheme, g_bs);
    grid.aoa = grid_angles(scheme, g_ue);
    return grid;
}

PerturbationBounds cell_bounds(const std::vector<double> &angles, int index)
{
    const int count = static_cast<int>(angles.size());
    if (index < 0 || index >= count)
        throw std::invalid_argument("perturbation_bounds: grid index out of range");
    const double theta = angles[index];
    const double below = index > 0 ? angles[index - 1] : theta;
    const double above = index + 1 < count ? angles[index + 1] : kPi;
    PerturbationBounds b;
    b.lower = -0.5 * (theta - below);
    b.upper = 0.5 * (above - theta);
    if (theta + b.lower < 0.0)
        b.lower = -theta;
    return b;
}

std::pair<PerturbationBounds, PerturbationBounds> perturbation_bounds(const Grid &grid, int aoa_index,
                                                                      int aod_index)
{
    return {cell_bounds(grid.aoa, aoa_index), cell_bounds(grid.aod, aod_index)};
}

Dictionary::Dictionary(Grid grid, ArrayGeometry bs, ArrayGeometry ue)
    : grid_(std::move(grid)), bs_(bs), ue_(ue)
{
    if (grid_.g_bs() < 2 || grid_.g_ue() < 2)
        throw std::invalid_argument("Dictionary: grid sizes must be >= 2");
    const Index rows = static_cast<Index>(bs_.num_antennas()) * ue_.num_antennas();
    psi_.resize(rows, static_cast<Index>(grid_.g_bs()) * grid_.g_ue());
    for (int i_tx = 0; i_tx < grid_.g_bs(); ++i_tx)
        for (int i_rx = 0; i_rx < grid_.g_ue(); ++i_rx)
            psi_.col(column_index(i_rx, i_tx)) = steering_atom(grid_.aoa[i_rx], grid_.aod[i_tx], bs_, ue_);
}

Index Dictionary::column_index(int aoa_index, int aod_index) const
{
    if (aoa_index < 0 || aoa_index >= grid_.g_ue() || aod_index < 0 || aod_index >= grid_.g_bs())
        throw std::invalid_argument("Dictionary: grid index out of range");
    return static_cast<Index>(aod_index) * grid_.g_ue() + aoa_index;
}

CMat Dictionary::aoa_responses() const
{
    CMat A(ue_.num_antennas(), grid_.g_ue());
    for (int i = 0; i < grid_.g_ue(); ++i)
        A.col(i) = array_response(grid_.aoa[i], ue_);
    return A;
}

CMat Dictionary::aod_responses() const
{
    CMat A(bs_.num_antennas(), grid_.g_bs());
    for (int i = 0; i < grid_.g_bs(); ++i)
        A.col(i) = array_response(grid_.aod[i], bs_);
    return A;
}

Dictionary build_dictionary(const Grid &grid, const ArrayGeometry &bs, const ArrayGeometry &ue)
{
    return Dictionary(grid, bs, ue);
}

double mutual_coherence(const CMat &dictionary)
{
    CMat normalized = dictionary;
    for (Index j = 0; j < normalized.cols(); ++j)
    {
        const double n = normalized.col(j).norm();
        if (n > 0.0)
            normalized.col(j) /= n;
    }
    const CMat gram = normalized.adjoint() * normalized;
    double mu = 0.0;
    for (Index j = 0; j < gram.cols(); ++j)
        for (Index i = 0; i < gram.rows(); ++i)
            if (i != j)
                mu = std::max(mu, std::abs(gram(i, j)));
    return mu;
}
} // namespace offgrid
