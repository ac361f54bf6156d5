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

#ifndef OFFGRID_METRICS_HPP
#define OFFGRID_METRICS_HPP

#include <span>

#include <offgrid/types.hpp>

namespace offgrid
{
struct MetricReport
{
    double nmse_h = 0.0;
    double nmse_c = 0.0;
    double eta = 0.0;
    int subspace_rank = 1;

    double nmse_h_db() const;
    double nmse_c_db() const;
};

double to_db(double linear);

/// Mean over snapshots of ||H_t - H^_t||_F^2 / ||H_t||_F^2.
double nmse_h(std::span<const CMat> truth, std::span<const CMat> estimate);

double nmse_c(const CMat &r_true, const CMat &r_hat);

/// Relative efficiency tr(U^_r^H R U^_r) / tr(U_r^H R U_r), where U_r and U^_r hold the
/// r dominant singular vectors of R and R^. Lies in [0, 1].
double relative_efficiency(const CMat &r_true, const CMat &r_hat, int rank);

/// Leading r singular vectors of a Hermitian matrix (ordered by |eigenvalue|).
CMat dominant_subspace(const CMat &hermitian, int rank);
} // namespace offgrid

#endif
