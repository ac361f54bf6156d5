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

#include <offgrid/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

namespace offgrid
{
double to_db(double linear)
{
    return 10.0 * std::log10(linear);
}

double MetricReport::nmse_h_db() const { return to_db(nmse_h); }
double MetricReport::nmse_c_db() const { return to_db(nmse_c); }

double nmse_h(std::span<const CMat> truth, std::span<const CMat> estimate)
{
    if (truth.size() != estimate.size() || truth.empty())
        throw std::invalid_argument("nmse_h: need equally many (non-zero) true and estimated snapshots");
    double acc = 0.0;
    for (std::size_t t = 0; t < truth.size(); ++t)
    {
        const double ref = truth[t].squaredNorm();
        if (ref == 0.0)
            throw std::invalid_argument("nmse_h: zero reference channel");
        acc += (truth[t] - estimate[t]).squaredNorm() / ref;
    }
    return acc / static_cast<double>(truth.size());
}

double nmse_c(const CMat &r_true, const CMat &r_hat)
{
    const double ref = r_true.squaredNorm();
    if (ref == 0.0)
        throw std::invalid_argument("nmse_c: zero reference covariance");
    return (r_hat - r_true).squaredNorm() / ref;
}

CMat dominant_subspace(const CMat &hermitian, int rank)
{
    const Index n = hermitian.rows();
    if (rank < 1 || rank > n)
        throw std::invalid_argument("dominant_subspace: rank must be in [1, dim]");
    const CMat h = 0.5 * (hermitian + hermitian.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> eig(h);
    const RVec &w = eig.eigenvalues();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return std::abs(w[a]) > std::abs(w[b]); });
    CMat U(n, rank);
    for (int i = 0; i < rank; ++i)
        U.col(i) = eig.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    return U;
}

double relative_efficiency(const CMat &r_true, const CMat &r_hat, int rank)
{
    if (r_true.rows() != r_hat.rows() || r_true.cols() != r_hat.cols() || r_true.rows() != r_true.cols())
        throw std::invalid_argument("relative_efficiency: shape mismatch");
    if (rank < 1 || rank > r_true.rows())
        throw std::invalid_argument("relative_efficiency: rank must be in [1, dim]");
    if (r_true.squaredNorm() == 0.0)
        throw std::invalid_argument("relative_efficiency: zero reference covariance");

    const CMat U = dominant_subspace(r_true, rank);
    const double best = std::real((U.adjoint() * r_true * U).trace());
    if (r_hat.squaredNorm() == 0.0)
        return 0.0;
    const CMat V = dominant_subspace(r_hat, rank);
    const double got = std::real((V.adjoint() * r_true * V).trace());
    return std::clamp(got / best, 0.0, 1.0);
}
} // namespace offgrid
