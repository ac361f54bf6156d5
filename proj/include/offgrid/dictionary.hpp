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

#ifndef OFFGRID_DICTIONARY_HPP
#define OFFGRID_DICTIONARY_HPP

#include <utility>
#include <vector>

#include <offgrid/channel_model.hpp>
#include <offgrid/types.hpp>

namespace offgrid
{
enum class GridScheme
{
    UniformTheta,    // theta_i = (i - 1) pi / G
    UniformCosTheta, // cos(theta_i) = 1 - 2 (i - 1) / G
};

struct Grid
{
    std::vector<double> aod; // G_BS angles, ascending
    std::vector<double> aoa; // G_UE angles, ascending
    GridScheme scheme = GridScheme::UniformCosTheta;

    int g_bs() const { return static_cast<int>(aod.size()); }
    int g_ue() const { return static_cast<int>(aoa.size()); }
};

/// Offsets relative to a grid angle: lower <= 0 <= upper.
struct PerturbationBounds
{
    double lower = 0.0;
    double upper = 0.0;
};

Grid build_grid(GridScheme scheme, int g_bs, int g_ue);

// Angles of a single domain of the grid.
std::vector<double> grid_angles(GridScheme scheme, int count);

/// Cell of grid point `index`: half the distance to each neighbour. The point at
/// theta = 0 gets a zero lower bound; the last point uses pi (the alias of 0) as
/// its upper neighbour, so every cell stays inside [0, pi).
PerturbationBounds cell_bounds(const std::vector<double> &angles, int index);

/// Returns (AoA bounds, AoD bounds) of dictionary cell (aoa_index, aod_index).
std::pair<PerturbationBounds, PerturbationBounds> perturbation_bounds(const Grid &grid, int aoa_index,
                                                                      int aod_index);

/// Virtual-channel dictionary. Column (i_rx, i_tx) has flat index
/// i_tx * G_UE + i_rx and equals vec(a_UE(aoa_i_rx) a_BS(aod_i_tx)^H), which makes
/// psi = conj(A_BS) kron A_UE and psi * vec(H_V) = vec(A_UE H_V A_BS^H).
class Dictionary
{
public:
    Dictionary(Grid grid, ArrayGeometry bs, ArrayGeometry ue);

    const Grid &grid() const { return grid_; }
    const CMat &psi() const { return psi_; }
    const ArrayGeometry &bs() const { return bs_; }
    const ArrayGeometry &ue() const { return ue_; }

    Index columns() const { return psi_.cols(); }
    Index column_index(int aoa_index, int aod_index) const;
    int aoa_index(Index column) const { return static_cast<int>(column % grid_.g_ue()); }
    int aod_index(Index column) const { return static_cast<int>(column / grid_.g_ue()); }

    CMat aoa_responses() const; // A_UE, N x G_UE
    CMat aod_responses() const; // A_BS, M x G_BS

private:
    Grid grid_;
    ArrayGeometry bs_;
    ArrayGeometry ue_;
    CMat psi_;
};

Dictionary build_dictionary(const Grid &grid, const ArrayGeometry &bs, const ArrayGeometry &ue);

// max_{i != j} |<c_i, c_j>| / (|c_i| |c_j|)
double mutual_coherence(const CMat &dictionary);
} // namespace offgrid

#endif
