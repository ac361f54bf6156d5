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

#include <offgrid/kernels.hpp>

#include <cmath>
#include <stdexcept>

#include <omp.h>

namespace offgrid::kernels
{
namespace
{
void check_frames(std::size_t a, std::size_t b)
{
    if (a != b)
        throw std::invalid_argument("kernels: frame count mismatch");
}
} // namespace

namespace serial
{
std::vector<CMat> sense_dictionary(std::span<const CMat> phi, const CMat &psi)
{
    std::vector<CMat> out;
    out.reserve(phi.size());
    for (const CMat &p : phi)
    {
        if (p.cols() != psi.rows())
            throw std::invalid_argument("sense_dictionary: dimension mismatch");
        CMat c = CMat::Zero(p.rows(), psi.cols());
        for (Index j = 0; j < psi.cols(); ++j)
            for (Index k = 0; k < p.cols(); ++k)
            {
                const cd v = psi(k, j);
                for (Index i = 0; i < p.rows(); ++i)
                    c(i, j) += p(i, k) * v;
            }
        out.push_back(std::move(c));
    }
    return out;
}

RVec linear_scores(std::span<const CMat> sensed, std::span<const CVec> residuals)
{
    check_frames(sensed.size(), residuals.size());
    if (sensed.empty())
        return RVec();
    RVec scores = RVec::Zero(sensed.front().cols());
    for (std::size_t t = 0; t < sensed.size(); ++t)
    {
        const CMat &c = sensed[t];
        const CVec &r = residuals[t];
        for (Index j = 0; j < c.cols(); ++j)
        {
            cd acc = 0.0;
            for (Index i = 0; i < c.rows(); ++i)
                acc += std::conj(c(i, j)) * r[i];
            scores[j] += std::abs(acc);
        }
    }
    return scores;
}

RVec quadratic_scores(std::span<const CMat> sensed, std::span<const CMat> residual_covs)
{
    check_frames(sensed.size(), residual_covs.size());
    if (sensed.empty())
        return RVec();
    RVec scores = RVec::Zero(sensed.front().cols());
    for (std::size_t t = 0; t < sensed.size(); ++t)
    {
        const CMat &c = sensed[t];
        const CMat &R = residual_covs[t];
        for (Index j = 0; j < c.cols(); ++j)
        {
            cd acc = 0.0;
            for (Index a = 0; a < c.rows(); ++a)
            {
                cd row = 0.0;
                for (Index b = 0; b < c.rows(); ++b)
                    row += R(a, b) * c(b, j);
                acc += std::conj(c(a, j)) * row;
            }
            scores[j] += std::abs(acc);
        }
    }
    return scores;
}
} // namespace serial

namespace parallel
{
std::vector<CMat> sense_dictionary(std::span<const CMat> phi, const CMat &psi)
{
    std::vector<CMat> out(phi.size());
    const long frames = static_cast<long>(phi.size());
#pragma omp parallel for schedule(static)
    for (long t = 0; t < frames; ++t)
        out[t].noalias() = phi[t] * psi;
    return out;
}

RVec linear_scores(std::span<const CMat> sensed, std::span<const CVec> residuals)
{
    check_frames(sensed.size(), residuals.size());
    if (sensed.empty())
        return RVec();
    const Index cols = sensed.front().cols();
    RVec scores(cols);
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < cols; ++j)
    {
        double s = 0.0;
        for (std::size_t t = 0; t < sensed.size(); ++t)
            s += std::abs(sensed[t].col(j).dot(residuals[t]));
        scores[j] = s;
    }
    return scores;
}

RVec quadratic_scores(std::span<const CMat> sensed, std::span<const CMat> residual_covs)
{
    check_frames(sensed.size(), residual_covs.size());
    if (sensed.empty())
        return RVec();
    const Index cols = sensed.front().cols();
    const long frames = static_cast<long>(sensed.size());
    // per-frame partial sums, reduced in frame order for a thread-count independent result
    RMat partial(cols, frames);
#pragma omp parallel for schedule(static)
    for (long t = 0; t < frames; ++t)
    {
        const CMat rc = residual_covs[t] * sensed[t];
        for (Index j = 0; j < cols; ++j)
            partial(j, t) = std::abs(sensed[t].col(j).dot(rc.col(j)));
    }
    return partial.rowwise().sum();
}
} // namespace parallel

Index argmax_excluding(const RVec &scores, const std::vector<bool> &excluded)
{
    Index best = -1;
    double best_score = -1.0;
    for (Index j = 0; j < scores.size(); ++j)
    {
        if (j < static_cast<Index>(excluded.size()) && excluded[j])
            continue;
        if (scores[j] > best_score)
        {
            best = j;
            best_score = scores[j];
        }
    }
    return best;
}
} // namespace offgrid::kernels
