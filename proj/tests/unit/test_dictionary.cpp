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

#include <offgrid/dictionary.hpp>

#include "fixtures.hpp"

using namespace offgrid;
using Catch::Approx;

TEST_CASE("grid angles: small grids")
{
    const auto theta = grid_angles(GridScheme::UniformTheta, 4);
    const std::vector<double> expected_theta{0.0, kPi / 4, kPi / 2, 3 * kPi / 4};
    for (int i = 0; i < 4; ++i)
        CHECK(theta[i] == Approx(expected_theta[i]).margin(1e-15));

    const auto cosine = grid_angles(GridScheme::UniformCosTheta, 4);
    const std::vector<double> expected_cos{0.0, kPi / 3, kPi / 2, 2 * kPi / 3};
    for (int i = 0; i < 4; ++i)
        CHECK(cosine[i] == Approx(expected_cos[i]).margin(1e-15));

    CHECK_THROWS_AS(grid_angles(GridScheme::UniformTheta, 1), std::invalid_argument);
}

TEST_CASE("grid angles: cosines are uniformly spaced")
{
    auto angles = grid_angles(GridScheme::UniformCosTheta, 16);
    REQUIRE(angles.size() == 16u);
    for (int i = 0; i < 16; ++i)
        CHECK(std::abs(std::cos(angles[i]) - (1.0 - 0.125 * i)) < 1e-12);
}

TEST_CASE("grid angles: strictly increasing inside [0, pi)")
{
    for (GridScheme s : {GridScheme::UniformTheta, GridScheme::UniformCosTheta})
        for (int g : {2, 3, 16, 48})
        {
            const auto a = grid_angles(s, g);
            REQUIRE(static_cast<int>(a.size()) == g);
            CHECK(a.front() >= 0.0);
            CHECK(a.back() < kPi);
            for (int i = 1; i < g; ++i)
                CHECK(a[i] > a[i - 1]);
        }
}

TEST_CASE("perturbation bounds: uniform theta interior is symmetric")
{
    const Grid grid = build_grid(GridScheme::UniformTheta, 16, 16);
    for (int i = 1; i < 15; ++i)
    {
        const auto [rx, tx] = perturbation_bounds(grid, i, i);
        CHECK(rx.lower == Approx(-kPi / 32));
        CHECK(rx.upper == Approx(kPi / 32));
        CHECK(tx.lower == Approx(-kPi / 32));
        CHECK(tx.upper == Approx(kPi / 32));
    }
}

TEST_CASE("perturbation bounds: uniform cos neighbours and edges")
{
    const auto angles = grid_angles(GridScheme::UniformCosTheta, 4);
    const PerturbationBounds mid = cell_bounds(angles, 1);
    CHECK(mid.lower == Approx(-(kPi / 3) / 2));
    CHECK(mid.upper == Approx((kPi / 2 - kPi / 3) / 2));

    const PerturbationBounds first = cell_bounds(angles, 0);
    CHECK(first.lower == 0.0);
    CHECK(first.upper > 0.0);

    const PerturbationBounds last = cell_bounds(angles, 3);
    CHECK(angles[3] + last.upper <= kPi);
    CHECK(last.lower < 0.0);

    CHECK_THROWS_AS(cell_bounds(angles, 4), std::invalid_argument);
    CHECK_THROWS_AS(cell_bounds(angles, -1), std::invalid_argument);
}

TEST_CASE("perturbation bounds: cells tile without overlap")
{
    for (GridScheme s : {GridScheme::UniformTheta, GridScheme::UniformCosTheta})
    {
        const auto a = grid_angles(s, 16);
        for (int i = 0; i < 16; ++i)
        {
            const PerturbationBounds b = cell_bounds(a, i);
            CHECK(b.lower <= 0.0);
            CHECK(b.upper >= 0.0);
            CHECK(a[i] + b.lower >= 0.0);
            CHECK(a[i] + b.upper <= kPi);
            if (i + 1 < 16)
                CHECK(std::abs(a[i] + b.upper - (a[i + 1] + cell_bounds(a, i + 1).lower)) < 1e-12);
        }
    }
}

TEST_CASE("dictionary: 2x2 per-column enumeration")
{
    const Grid grid = build_grid(GridScheme::UniformCosTheta, 2, 2);
    const ArrayGeometry bs(2), ue(2);
    const Dictionary dict(grid, bs, ue);
    REQUIRE(dict.psi().rows() == 4);
    REQUIRE(dict.psi().cols() == 4);
    for (int tx = 0; tx < 2; ++tx)
        for (int rx = 0; rx < 2; ++rx)
        {
            const CMat outer = array_response(grid.aoa[rx], ue) * array_response(grid.aod[tx], bs).adjoint();
            CVec expected(4);
            // column-major vec written out by hand
            expected << outer(0, 0), outer(1, 0), outer(0, 1), outer(1, 1);
            CHECK((dict.psi().col(dict.column_index(rx, tx)) - expected).norm() < 1e-14);
        }
}

TEST_CASE("dictionary: unit columns and index round trip")
{
    const Dictionary dict(build_grid(GridScheme::UniformCosTheta, 16, 12), ArrayGeometry(16), ArrayGeometry(8));
    REQUIRE(dict.columns() == 192);
    for (Index j = 0; j < dict.columns(); ++j)
    {
        CHECK(std::abs(dict.psi().col(j).norm() - 1.0) < 1e-12);
        CHECK(dict.column_index(dict.aoa_index(j), dict.aod_index(j)) == j);
    }
    CHECK_THROWS_AS(dict.column_index(12, 0), std::invalid_argument);
}

TEST_CASE("dictionary: Kronecker identity on random sparse coefficient matrices")
{
    const Grid grid = build_grid(GridScheme::UniformCosTheta, 4, 4);
    const Dictionary dict(grid, ArrayGeometry(4), ArrayGeometry(4));
    const CMat a_ue = dict.aoa_responses();
    const CMat a_bs = dict.aod_responses();
    Rng rng(31);
    std::bernoulli_distribution keep(0.3);
    for (int f = 0; f < 50; ++f)
    {
        CMat hv = test::random_matrix(4, 4, rng);
        for (Index j = 0; j < 4; ++j)
            for (Index i = 0; i < 4; ++i)
                if (!keep(rng))
                    hv(i, j) = 0.0;
        const CVec lhs = dict.psi() * vec(hv);
        const CVec rhs = vec(a_ue * hv * a_bs.adjoint());
        CHECK((lhs - rhs).norm() < 1e-12);
    }
}

TEST_CASE("dictionary: on-grid channel correlates best with its own column")
{
    const Grid grid = build_grid(GridScheme::UniformCosTheta, 8, 8);
    const ArrayGeometry bs(8), ue(4);
    const Dictionary dict(grid, bs, ue);
    for (int tx = 0; tx < 8; ++tx)
        for (int rx = 0; rx < 8; ++rx)
        {
            const CMat h = array_response(grid.aoa[rx], ue) * array_response(grid.aod[tx], bs).adjoint();
            const RVec corr = (dict.psi().adjoint() * vec(h)).cwiseAbs();
            Index best = 0;
            corr.maxCoeff(&best);
            CHECK(best == dict.column_index(rx, tx));
        }
}

TEST_CASE("dictionary: cosine sampling lowers coherence")
{
    const ArrayGeometry arr(16);
    const double mu_cos = mutual_coherence(Dictionary(build_grid(GridScheme::UniformCosTheta, 16, 16), arr, arr).psi());
    const double mu_theta = mutual_coherence(Dictionary(build_grid(GridScheme::UniformTheta, 16, 16), arr, arr).psi());
    CHECK(mu_cos <= mu_theta);
}
