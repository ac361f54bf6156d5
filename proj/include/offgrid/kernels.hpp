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

#ifndef OFFGRID_KERNELS_HPP
#define OFFGRID_KERNELS_HPP

#include <span>
#include <vector>

#include <offgrid/types.hpp>

namespace offgrid::kernels
{
// Greedy-selection hot loops. The serial namespace is the plain-loop reference
// used by the tests; the parallel namespace is what the solvers call.

namespace serial
{
// Phi_t * Psi for every frame.
std::vector<CMat> sense_dictionary(std::span<const CMat> phi, const CMat &psi);

// score_j = sum_t |c_{t,j}^H r_t|
RVec linear_scores(std::span<const CMat> sensed, std::span<const CVec> residuals);

// score_j = sum_t |c_{t,j}^H R_t c_{t,j}|
RVec quadratic_scores(std::span<const CMat> sensed, std::span<const CMat> residual_covs);
} // namespace serial

namespace parallel
{
std::vector<CMat> sense_dictionary(std::span<const CMat> phi, const CMat &psi);
RVec linear_scores(std::span<const CMat> sensed, std::span<const CVec> residuals);
RVec quadratic_scores(std::span<const CMat> sensed, std::span<const CMat> residual_covs);
} // namespace parallel

// Index of the largest score with excluded[j] skipped; ties go to the lowest index.
// Returns -1 when nothing is selectable.
Index argmax_excluding(const RVec &scores, const std::vector<bool> &excluded);
} // namespace offgrid::kernels

#endif
