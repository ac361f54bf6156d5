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

#include <offgrid/channel_model.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace offgrid
{
ArrayGeometry::ArrayGeometry(int num_antennas, double spacing_over_wavelength)
    : num_antennas_(num_antennas), spacing_(spacing_over_wavelength)
{
    if (num_antennas < 1)
        throw std::invalid_argument("ArrayGeometry: num_antennas must be >= 1");
    if (!(spacing_over_wavelength > 0.0) || !std::isfinite(spacing_over_wavelength))
        throw std::invalid_argument("ArrayGeometry: element spacing must be positive");
}

void ChannelParams::validate() const
{
    if (clusters < 1)
        throw std::invalid_argument("ChannelParams: clusters must be >= 1");
    if (paths_per_cluster < 1)
        throw std::invalid_argument("ChannelParams: paths_per_cluster must be >= 1");
    if (snapshots < 1)
        throw std::invalid_argument("ChannelParams: snapshots must be >= 1");
    if (!(sigma_aoa >= 0.0) || !(sigma_aod >= 0.0))
        throw std::invalid_argument("ChannelParams: angular spreads must be >= 0");
    if (!(path_loss > 0.0))
        throw std::invalid_argument("ChannelParams: path_loss must be > 0");
}

CVec array_response(double theta, const ArrayGeometry &geometry)
{
    if (!std::isfinite(theta))
        throw std::invalid_argument("array_response: non-finite angle");
    const int n = geometry.num_antennas();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double phase = 2.0 * kPi * geometry.spacing() * std::cos(theta);
    CVec a(n);
    for (int i = 0; i < n; ++i)
        a[i] = std::polar(scale, phase * i);
    return a;
}

CVec array_response_derivative(double theta, const ArrayGeometry &geometry)
{
    if (!std::isfinite(theta))
        throw std::invalid_argument("array_response_derivative: non-finite angle");
    const int n = geometry.num_antennas();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double k = 2.0 * kPi * geometry.spacing();
    const double phase = k * std::cos(theta);
    const double dphase = -k * std::sin(theta);
    CVec d(n);
    for (int i = 0; i < n; ++i)
        d[i] = kJ * (dphase * i) * std::polar(scale, phase * i);
    return d;
}

CVec steering_atom(double aoa, double aod, const ArrayGeometry &bs, const ArrayGeometry &ue)
{
    const CVec a_ue = array_response(aoa, ue);
    const CVec a_bs = array_response(aod, bs);
    const Index n = a_ue.size();
    CVec v(n * a_bs.size());
    for (Index m = 0; m < a_bs.size(); ++m)
        v.segment(m * n, n) = std::conj(a_bs[m]) * a_ue;
    return v;
}

double wrap_angle(double theta)
{
    double w = std::fmod(theta, kPi);
    if (w < 0.0)
        w += kPi;
    // fmod of a value just below a multiple of pi can round up to pi
    if (w >= kPi)
        w = 0.0;
    return w;
}

double draw_laplacian(double scale, Rng &rng)
{
    if (scale == 0.0)
        return 0.0;
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    double u = uni(rng);
    while (u == -0.5)
        u = uni(rng);
    const double sgn = u < 0.0 ? -1.0 : 1.0;
    return -scale * sgn * std::log1p(-2.0 * std::abs(u));
}

PathSet draw_paths(const ChannelParams &params, Rng &rng)
{
    params.validate();
    std::uniform_real_distribution<double> center(0.0, kPi);
    PathSet paths;
    paths.aoa.reserve(params.num_paths());
    paths.aod.reserve(params.num_paths());
    for (int k = 0; k < params.clusters; ++k)
    {
        const double aoa_center = center(rng);
        const double aod_center = center(rng);
        for (int l = 0; l < params.paths_per_cluster; ++l)
        {
            paths.aoa.push_back(wrap_angle(aoa_center + draw_laplacian(params.sigma_aoa, rng)));
            paths.aod.push_back(wrap_angle(aod_center + draw_laplacian(params.sigma_aod, rng)));
        }
    }
    return paths;
}

CMat draw_gains(const ChannelParams &params, Rng &rng)
{
    params.validate();
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    CMat gains(params.snapshots, params.num_paths());
    for (int t = 0; t < params.snapshots; ++t)
        for (int p = 0; p < params.num_paths(); ++p)
        {
            const double re = normal(rng);
            const double im = normal(rng);
            gains(t, p) = cd(re, im);
        }
    return gains;
}

ChannelRealization synthesize_channel(const PathSet &paths, const CMat &gains, double path_loss,
                                      const ArrayGeometry &bs, const ArrayGeometry &ue)
{
    if (paths.aoa.size() != paths.aod.size())
        throw std::invalid_argument("synthesize_channel: AoA/AoD count mismatch");
    if (gains.cols() != static_cast<Index>(paths.size()))
        throw std::invalid_argument("synthesize_channel: gains must have one column per path");
    if (!(path_loss > 0.0))
        throw std::invalid_argument("synthesize_channel: path_loss must be > 0");

    std::vector<CVec> a_ue, a_bs;
    for (std::size_t p = 0; p < paths.size(); ++p)
    {
        a_ue.push_back(array_response(paths.aoa[p], ue));
        a_bs.push_back(array_response(paths.aod[p], bs));
    }

    ChannelRealization out;
    out.gains = gains;
    out.H.reserve(gains.rows());
    for (Index t = 0; t < gains.rows(); ++t)
    {
        CMat H = CMat::Zero(ue.num_antennas(), bs.num_antennas());
        for (std::size_t p = 0; p < paths.size(); ++p)
            H.noalias() += gains(t, static_cast<Index>(p)) * a_ue[p] * a_bs[p].adjoint();
        out.H.push_back(H / path_loss);
    }
    return out;
}

CMat true_covariance(const PathSet &paths, double path_loss, const ArrayGeometry &bs,
                     const ArrayGeometry &ue)
{
    const Index dim = static_cast<Index>(bs.num_antennas()) * ue.num_antennas();
    CMat R = CMat::Zero(dim, dim);
    for (std::size_t p = 0; p < paths.size(); ++p)
    {
        const CVec v = steering_atom(paths.aoa[p], paths.aod[p], bs, ue);
        R.noalias() += v * v.adjoint();
    }
    return R / (path_loss * path_loss);
}

CMat sample_covariance(const ChannelRealization &channel)
{
    if (channel.H.empty())
        throw std::invalid_argument("sample_covariance: empty realization");
    const Index dim = channel.H.front().size();
    CMat R = CMat::Zero(dim, dim);
    for (const CMat &H : channel.H)
    {
        const CVec h = vec(H);
        R.noalias() += h * h.adjoint();
    }
    return R / static_cast<double>(channel.H.size());
}
} // namespace offgrid
