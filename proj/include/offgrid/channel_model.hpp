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

#ifndef OFFGRID_CHANNEL_MODEL_HPP
#define OFFGRID_CHANNEL_MODEL_HPP

#include <cstdint>
#include <vector>

#include <offgrid/rng.hpp>
#include <offgrid/types.hpp>

namespace offgrid
{
/// Uniform linear array. Spacing is in wavelengths.
class ArrayGeometry
{
public:
    explicit ArrayGeometry(int num_antennas, double spacing_over_wavelength = 0.5);

    int num_antennas() const { return num_antennas_; }
    double spacing() const { return spacing_; }

    bool operator==(const ArrayGeometry &) const = default;

private:
    int num_antennas_;
    double spacing_;
};

/// Geometric cluster channel parameters. Angular spreads are Laplacian scale
/// parameters in radians.
struct ChannelParams
{
    int clusters = 4;
    int paths_per_cluster = 2;
    double sigma_aoa = 20.0 * kPi / 180.0;
    double sigma_aod = 20.0 * kPi / 180.0;
    int snapshots = 1;
    double path_loss = 1.0;

    int num_paths() const { return clusters * paths_per_cluster; }
    void validate() const;
};

/// Continuous AoA/AoD of every path, constant over all snapshots. Path index is
/// k * L + l for cluster k and path l.
struct PathSet
{
    std::vector<double> aoa;
    std::vector<double> aod;

    std::size_t size() const { return aoa.size(); }
};

struct ChannelRealization
{
    std::vector<CMat> H; // T matrices, N x M
    CMat gains;          // T x (K*L)

    int snapshots() const { return static_cast<int>(H.size()); }
};

// Normalized ULA response, entry n = exp(j 2 pi d n cos(theta)) / sqrt(num_antennas), n = 0..
CVec array_response(double theta, const ArrayGeometry &geometry);

// d/dtheta of array_response.
CVec array_response_derivative(double theta, const ArrayGeometry &geometry);

// vec(a_UE(aoa) a_BS(aod)^H) = conj(a_BS) kron a_UE, length M*N.
CVec steering_atom(double aoa, double aod, const ArrayGeometry &bs, const ArrayGeometry &ue);

// Wraps any finite angle into [0, pi).
double wrap_angle(double theta);

// Laplacian(0, scale) sample by inverse CDF.
double draw_laplacian(double scale, Rng &rng);

PathSet draw_paths(const ChannelParams &params, Rng &rng);

// T x (K*L) i.i.d. CN(0, 1) gains; frames drawn in order so a shorter run is a
// prefix of a longer one.
CMat draw_gains(const ChannelParams &params, Rng &rng);

ChannelRealization synthesize_channel(const PathSet &paths, const CMat &gains, double path_loss,
                                      const ArrayGeometry &bs, const ArrayGeometry &ue);

/// Analytic covariance E[h h^H] over unit-variance i.i.d. gains with the angles fixed.
CMat true_covariance(const PathSet &paths, double path_loss, const ArrayGeometry &bs,
                     const ArrayGeometry &ue);

/// (1/T) sum_t vec(H_t) vec(H_t)^H.
CMat sample_covariance(const ChannelRealization &channel);

inline CVec vec(const CMat &m) { return m.reshaped(); }
} // namespace offgrid

#endif
