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

#include "catch2/catch_amalgamated.hpp"

#include <Eigen/QR>

#include <offgrid/metrics.hpp>

#include "fixtures.hpp"

using namespace offgrid;
using Catch::Approx;

TEST_CASE("nmse_h: reference values")
{
    Rng rng(50);
    const std::vector<CMat> h{test::random_matrix(8, 16, rng), test::random_matrix(8, 16, rng)};
    const std::vector<CMat> zero{CMat::Zero(8, 16), CMat::Zero(8, 16)};
    const std::vector<CMat> twice{2.0 * h[0], 2.0 * h[1]};
    CHECK(nmse_h(h, h) == 0.0);
    CHECK(nmse_h(h, zero) == Approx(1.0));
    CHECK(nmse_h(h, twice) == Approx(1.0));
    CHECK_THROWS_AS(nmse_h(zero, h), std::invalid_argument);
}

TEST_CASE("nmse_c: reference values and scaling")
{
    Rng rng(51);
    const CMat R = test::random_psd(12, 3, rng);
    CHECK(nmse_c(R, R) == 0.0);
    CHECK(nmse_c(R, CMat::Zero(12, 12)) == Approx(1.0));
    CMat E = test::random_matrix(12, 12, rng);
    E *= 0.1 * R.norm() / E.norm();
    CHECK(nmse_c(R, R + E) == Approx(0.01));
    for (double c : {-1.0, 0.0, 0.3, 2.5})
        CHECK(nmse_c(R, c * R) == Approx((1 - c) * (1 - c)).margin(1e-14));
    CHECK_THROWS_AS(nmse_c(CMat::Zero(3, 3), R.topLeftCorner(3, 3)), std::invalid_argument);
}

TEST_CASE("relative efficiency: identity, scaling and hand-computed diagonal case")
{
    Rng rng(52);
    for (int r : {1, 2, 4})
    {
        const CMat R = test::random_psd(10, 4, rng);
        CHECK(relative_efficiency(R, R, r) == Approx(1.0).margin(1e-10));
        CHECK(relative_efficiency(R, 3.7 * R, r) == Approx(1.0).margin(1e-10));
    }

    CMat R = CMat::Zero(4, 4);
    R.diagonal() << 4.0, 3.0, 2.0, 1.0;
    CMat R_hat = CMat::Zero(4, 4);
    R_hat.diagonal() << 0.0, 0.0, 5.0, 6.0;
    CHECK(relative_efficiency(R, R_hat, 2) == Approx(3.0 / 7.0));
    CHECK(relative_efficiency(R, CMat::Zero(4, 4), 2) == 0.0);
    CHECK_THROWS_AS(relative_efficiency(CMat::Zero(4, 4), R, 1), std::invalid_argument);
    CHECK_THROWS_AS(relative_efficiency(R, R, 0), std::invalid_argument);
    CHECK_THROWS_AS(relative_efficiency(R, R, 5), std::invalid_argument);
}

TEST_CASE("relative efficiency: unitary invariance and range")
{
    Rng rng(53);
    for (int i = 0; i < 20; ++i)
    {
        const CMat R = test::random_psd(8, 3, rng);
        const CMat R_hat = test::random_psd(8, 5, rng);
        const CMat Q = Eigen::HouseholderQR<CMat>(test::random_matrix(8, 8, rng)).householderQ();
        const double eta = relative_efficiency(R, R_hat, 2);
        CHECK(eta >= 0.0);
        CHECK(eta <= 1.0 + 1e-9);
        CHECK(std::abs(relative_efficiency(Q * R * Q.adjoint(), Q * R_hat * Q.adjoint(), 2) - eta) < 1e-10);
    }
}

TEST_CASE("decibels")
{
    CHECK(to_db(1.0) == 0.0);
    CHECK(to_db(0.01) == Approx(-20.0));
    MetricReport m;
    m.nmse_h = 10.0;
    CHECK(m.nmse_h_db() == Approx(10.0));
}
