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

#include <offgrid/sensing.hpp>

#include <cmath>
#include <stdexcept>

namespace offgrid
{
void TrainingConfig::validate(const ArrayGeometry &bs, const ArrayGeometry &ue) const
{
    if (m_rf < 1 || m_rf > bs.num_antennas())
        throw std::invalid_argument("TrainingConfig: m_rf must be in [1, M]");
    if (n_rf < 1 || n_rf > ue.num_antennas())
        throw std::invalid_argument("TrainingConfig: n_rf must be in [1, N]");
    if (frames < 1)
        throw std::invalid_argument("TrainingConfig: frames must be >= 1");
    if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
        throw std::invalid_argument("TrainingConfig: noise_variance must be finite and >= 0");
}

double noise_variance_from_snr_db(double snr_db)
{
    return std::pow(10.0, -snr_db / 10.0);
}

namespace
{
CVec draw_beam(int dim, BeamformerStyle style, Rng &rng)
{
    CVec v(dim);
    if (style == BeamformerStyle::UnitModulusRandomPhase)
    {
        std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
        const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
        for (int i = 0; i < dim; ++i)
            v[i] = std::polar(scale, phase(rng));
    }
    else
    {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int i = 0; i < dim; ++i)
        {
            const double re = normal(rng);
            const double im = normal(rng);
            v[i] = cd(re, im);
        }
        v.normalize();
    }
    return v;
}
} // namespace

Beamformers draw_beamformers(const TrainingConfig &cfg, const ArrayGeometry &bs, const ArrayGeometry &ue,
                             Rng &rng)
{
    cfg.validate(bs, ue);
    Beamformers out(cfg.frames);
    for (FrameBeamformers &frame : out)
    {
        frame.precoders.resize(bs.num_antennas(), cfg.m_rf);
        frame.combiners.resize(cfg.m_rf);
        for (int s = 0; s < cfg.m_rf; ++s)
        {
            frame.precoders.col(s) = draw_beam(bs.num_antennas(), cfg.style, rng);
            CMat W(ue.num_antennas(), cfg.n_rf);
            for (int i = 0; i < cfg.n_rf; ++i)
                W.col(i) = draw_beam(ue.num_antennas(), cfg.style, rng);
            frame.combiners[s] = std::move(W);
        }
    }
    return out;
}

CMat aggregate_sensing(const FrameBeamformers &frame)
{
    const Index m = frame.precoders.rows();
    const Index m_rf = frame.precoders.cols();
    if (static_cast<Index>(frame.combiners.size()) != m_rf || m_rf == 0)
        throw std::invalid_argument("aggregate_sensing: one combiner per precoder column is required");
    const Index n = frame.combiners.front().rows();
    const Index n_rf = frame.combiners.front().cols();

    CMat phi(m_rf * n_rf, m * n);
    for (Index s = 0; s < m_rf; ++s)
    {
        const CMat wh = frame.combiners[s].adjoint();
        for (Index j = 0; j < m; ++j)
            phi.block(s * n_rf, j * n, n_rf, n) = frame.precoders(j, s) * wh;
    }
    return phi;
}

CVec sense_outer(const FrameBeamformers &frame, const CVec &u, const CVec &v)
{
    const Index m_rf = frame.precoders.cols();
    const Index n_rf = frame.combiners.front().cols();
    CVec out(m_rf * n_rf);
    const Eigen::RowVectorXcd vf = v.adjoint() * frame.precoders;
    for (Index s = 0; s < m_rf; ++s)
        out.segment(s * n_rf, n_rf).noalias() = vf[s] * (frame.combiners[s].adjoint() * u);
    return out;
}

SensingBlock measure(const ChannelRealization &channel, const Beamformers &beamformers,
                     const TrainingConfig &cfg, const ArrayGeometry &bs, const ArrayGeometry &ue,
                     Rng &rng)
{
    cfg.validate(bs, ue);
    if (static_cast<int>(beamformers.size()) != channel.snapshots())
        throw std::invalid_argument("measure: need one beamformer frame per channel snapshot");

    SensingBlock block{bs, ue, beamformers, {}, {}};
    block.phi.reserve(beamformers.size());
    block.y.reserve(beamformers.size());

    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    const double sigma = std::sqrt(cfg.noise_variance);
    for (int t = 0; t < channel.snapshots(); ++t)
    {
        const FrameBeamformers &frame = beamformers[t];
        CMat phi = aggregate_sensing(frame);
        CVec y = phi * vec(channel.H[t]);
        const Index n_rf = frame.combiners.front().cols();
        for (std::size_t s = 0; s < frame.combiners.size(); ++s)
        {
            CVec noise(ue.num_antennas());
            for (Index i = 0; i < noise.size(); ++i)
            {
                const double re = normal(rng);
                const double im = normal(rng);
                noise[i] = cd(re, im);
            }
            if (sigma > 0.0)
                y.segment(static_cast<Index>(s) * n_rf, n_rf) += sigma * (frame.combiners[s].adjoint() * noise);
        }
        block.phi.push_back(std::move(phi));
        block.y.push_back(std::move(y));
    }
    return block;
}
} // namespace offgrid
