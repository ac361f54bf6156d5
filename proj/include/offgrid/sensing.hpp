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

#ifndef OFFGRID_SENSING_HPP
#define OFFGRID_SENSING_HPP

#include <vector>

#include <offgrid/channel_model.hpp>
#include <offgrid/rng.hpp>
#include <offgrid/types.hpp>

namespace offgrid
{
enum class BeamformerStyle
{
    UnitModulusRandomPhase, // entries exp(j phi) / sqrt(dim), phi ~ U[0, 2 pi)
    GaussianNormalized,     // i.i.d. CN(0, 1) columns scaled to unit norm
};

struct TrainingConfig
{
    int m_rf = 5;
    int n_rf = 6;
    int frames = 1;
    double noise_variance = 0.0;
    BeamformerStyle style = BeamformerStyle::UnitModulusRandomPhase;

    int measurements() const { return m_rf * n_rf; }
    void validate(const ArrayGeometry &bs, const ArrayGeometry &ue) const;
};

// Noise variance for an SNR in dB, with unit-norm responses and unit-variance gains.
double noise_variance_from_snr_db(double snr_db);

/// Dynamic training beams of one frame: a fresh precoder and combiner per symbol.
struct FrameBeamformers
{
    CMat precoders;             // M x M_RF, column s is f_{t,s}
    std::vector<CMat> combiners; // M_RF matrices W_{t,s}, N x N_RF
};

using Beamformers = std::vector<FrameBeamformers>;

Beamformers draw_beamformers(const TrainingConfig &cfg, const ArrayGeometry &bs, const ArrayGeometry &ue,
                             Rng &rng);

/// Phi_{t,agg}: row block s (N_RF rows) is f_{t,s}^T kron W_{t,s}^H, so that block s
/// of Phi vec(H) equals W_{t,s}^H H f_{t,s}.
CMat aggregate_sensing(const FrameBeamformers &frame);

/// Phi_t applied to vec(u v^H) without forming Phi: block s is (v^H f_s) W_s^H u.
CVec sense_outer(const FrameBeamformers &frame, const CVec &u, const CVec &v);

struct SensingBlock
{
    ArrayGeometry bs;
    ArrayGeometry ue;
    Beamformers beamformers;
    std::vector<CMat> phi; // T matrices, (M_RF N_RF) x MN
    std::vector<CVec> y;   // T vectors, M_RF N_RF

    int frames() const { return static_cast<int>(y.size()); }
    Index measurement_dim() const { return y.empty() ? 0 : y.front().size(); }
};

/// y_t = Phi_t vec(H_t) + stack_s(W_{t,s}^H n_{t,s}), n ~ CN(0, sigma^2 I_N), pilot x = 1.
/// The unit-variance noise draw does not depend on sigma, so runs that differ only
/// in SNR share the same noise realisation.
SensingBlock measure(const ChannelRealization &channel, const Beamformers &beamformers,
                     const TrainingConfig &cfg, const ArrayGeometry &bs, const ArrayGeometry &ue,
                     Rng &rng);
} // namespace offgrid

#endif
