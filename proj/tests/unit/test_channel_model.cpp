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

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <offgrid/channel_model.hpp>

#include "fixtures.hpp"

using namespace offgrid;
using Catch::Approx;

TEST_CASE("array response: broadside has no phase progression")
{
    const CVec a = array_response(kPi / 2, ArrayGeometry(4));
    for (Index n = 0; n < 4; ++n)
        CHECK(std::abs(a[n] - cd(0.5, 0.0)) < 1e-15);
}

TEST_CASE("array response: endfire at half wavelength alternates sign")
{
    const CVec a = array_response(0.0, ArrayGeometry(2, 0.5));
    CHECK(std::abs(a[0] - cd(1.0 / std::sqrt(2.0), 0.0)) < 1e-15);
    CHECK(std::abs(a[1] - cd(-1.0 / std::sqrt(2.0), 0.0)) < 1e-15);
}

TEST_CASE("array response: matches scalar loop")
{
    const double theta = kPi / 3;
    const CVec a = array_response(theta, ArrayGeometry(8));
    for (int n = 0; n < 8; ++n)
    {
        const double phase = 2.0 * kPi * 0.5 * n * std::cos(theta);
        const cd expected = cd(std::cos(phase), std::sin(phase)) / std::sqrt(8.0);
        CHECK(std::abs(a[n] - expected) < 1e-12);
    }
}

TEST_CASE("array response: unit norm and argument checks")
{
    Rng rng(7);
    const ArrayGeometry g(13, 0.37);
    for (int i = 0; i < 100; ++i)
        CHECK(std::abs(array_response(test::uniform(0.0, kPi, rng), g).norm() - 1.0) < 1e-12);
    CHECK_THROWS_AS(array_response(std::nan(""), g), std::invalid_argument);
    CHECK_THROWS_AS(array_response(INFINITY, g), std::invalid_argument);
    CHECK_THROWS_AS(ArrayGeometry(0), std::invalid_argument);
    CHECK_THROWS_AS(ArrayGeometry(4, 0.0), std::invalid_argument);
}

TEST_CASE("array response derivative: special angles")
{
    const ArrayGeometry g(8);
    CHECK(std::abs(array_response_derivative(kPi / 2, g)[0]) < 1e-15);
    CHECK(array_response_derivative(0.0, g).norm() < 1e-15);
}

TEST_CASE("array response derivative: central differences")
{
    Rng rng(11);
    const ArrayGeometry g(16);
    const double h = 1e-6;
    for (int i = 0; i < 100; ++i)
    {
        const double theta = test::uniform(0.05, kPi - 0.05, rng);
        const CVec fd = (array_response(theta + h, g) - array_response(theta - h, g)) / (2 * h);
        const CVec exact = array_response_derivative(theta, g);
        CHECK((fd - exact).norm() / exact.norm() < 1e-5);
    }
}

TEST_CASE("steering atom is vec of the outer product")
{
    const ArrayGeometry bs(5), ue(3);
    const CVec atom = steering_atom(0.7, 2.1, bs, ue);
    const CMat outer = array_response(0.7, ue) * array_response(2.1, bs).adjoint();
    CHECK((atom - vec(outer)).norm() < 1e-15);
}

TEST_CASE("wrap angle maps into [0, pi)")
{
    CHECK(wrap_angle(-0.25) == Approx(kPi - 0.25));
    CHECK(wrap_angle(kPi + 0.5) == Approx(0.5));
    CHECK(wrap_angle(kPi) == Approx(0.0).margin(1e-15));
    CHECK(wrap_angle(1.0) == 1.0);
}

TEST_CASE("draw paths: zero spread collapses clusters, seeds reproduce")
{
    ChannelParams p;
    p.sigma_aoa = 0.0;
    p.sigma_aod = 0.0;
    Rng rng(3);
    const PathSet paths = draw_paths(p, rng);
    REQUIRE(paths.size() == 8u);
    for (int k = 0; k < p.clusters; ++k)
    {
        CHECK(paths.aoa[2 * k] == paths.aoa[2 * k + 1]);
        CHECK(paths.aod[2 * k] == paths.aod[2 * k + 1]);
    }

    ChannelParams q;
    Rng a(99), b(99);
    const PathSet pa = draw_paths(q, a), pb = draw_paths(q, b);
    CHECK(pa.aoa == pb.aoa);
    CHECK(pa.aod == pb.aod);
    for (std::size_t i = 0; i < pa.size(); ++i)
    {
        CHECK(pa.aoa[i] >= 0.0);
        CHECK(pa.aoa[i] < kPi);
        CHECK(pa.aod[i] >= 0.0);
        CHECK(pa.aod[i] < kPi);
    }
}

TEST_CASE("laplacian offsets have standard deviation sqrt(2) sigma")
{
    Rng rng(5);
    const double sigma = 20.0 * kPi / 180.0;
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const double x = draw_laplacian(sigma, rng);
        s += x;
        s2 += x * x;
    }
    const double mean = s / n;
    const double sd = std::sqrt(s2 / n - mean * mean);
    CHECK(sd == Approx(std::sqrt(2.0) * sigma).epsilon(0.02));
}

TEST_CASE("gains are unit-variance circular Gaussian")
{
    ChannelParams p;
    p.snapshots = 12500; // 10^5 draws over 8 paths
    Rng rng(8);
    const CMat g = draw_gains(p, rng);
    REQUIRE(g.rows() == 12500);
    REQUIRE(g.cols() == 8);
    const double var = g.cwiseAbs2().mean();
    CHECK(var >= 0.98);
    CHECK(var <= 1.02);
    CHECK(std::isfinite(std::norm(g(0, 0))));
    CHECK(std::norm(g(0, 0)) > 0.0);

    Rng a(1), b(1);
    CHECK(draw_gains(p, a) == draw_gains(p, b));
}

TEST_CASE("gain draws of a shorter run are a prefix of a longer one")
{
    ChannelParams p;
    p.snapshots = 3;
    ChannelParams q = p;
    q.snapshots = 7;
    Rng a(4), b(4);
    const CMat short_run = draw_gains(p, a);
    const CMat long_run = draw_gains(q, b);
    CHECK(long_run.topRows(3) == short_run);
}

TEST_CASE("synthesize channel: single path, two paths, zero gains, linearity")
{
    const ArrayGeometry bs(16), ue(8);
    PathSet one{{0.4}, {1.9}};
    const ChannelRealization h1 = synthesize_channel(one, CMat::Ones(1, 1), 1.0, bs, ue);
    REQUIRE(h1.H.front().rows() == 8);
    REQUIRE(h1.H.front().cols() == 16);
    CHECK(h1.H.front().norm() == Approx(1.0).epsilon(1e-12));
    Eigen::JacobiSVD<CMat> svd(h1.H.front());
    CHECK(svd.singularValues()[1] < 1e-12);

    PathSet two{{0.4, 2.5}, {1.9, 0.3}};
    CMat g(1, 2);
    g << cd(0.3, -1.2), cd(-0.7, 0.1);
    const CMat expected = g(0, 0) * array_response(0.4, ue) * array_response(1.9, bs).adjoint() +
                          g(0, 1) * array_response(2.5, ue) * array_response(0.3, bs).adjoint();
    CHECK((synthesize_channel(two, g, 1.0, bs, ue).H.front() - expected).norm() < 1e-12);
    CHECK(synthesize_channel(two, CMat::Zero(3, 2), 1.0, bs, ue).H[2].norm() == 0.0);

    Rng rng(2);
    const CMat g1 = test::random_gains(2, 2, rng), g2 = test::random_gains(2, 2, rng);
    const auto a = synthesize_channel(two, g1, 1.0, bs, ue);
    const auto b = synthesize_channel(two, g2, 1.0, bs, ue);
    const auto c = synthesize_channel(two, g1 + g2, 1.0, bs, ue);
    for (int t = 0; t < 2; ++t)
        CHECK((c.H[t] - a.H[t] - b.H[t]).cwiseAbs().maxCoeff() < 1e-12);

    const auto scaled = synthesize_channel(two, g, 2.0, bs, ue);
    CHECK((scaled.H.front() - 0.5 * expected).norm() < 1e-12);
}

TEST_CASE("true covariance: single path, hermitian PSD, path loss")
{
    const ArrayGeometry bs(16), ue(8);
    PathSet one{{1.0}, {2.0}};
    CHECK(true_covariance(one, 1.0, bs, ue).trace().real() == Approx(1.0));
    CHECK(true_covariance(one, 2.0, bs, ue).trace().real() == Approx(0.25));

    ChannelParams p;
    Rng rng(12);
    const PathSet paths = draw_paths(p, rng);
    const CMat R = true_covariance(paths, 1.0, bs, ue);
    CHECK((R - R.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<CMat> eig(R);
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);
    const RVec w = eig.eigenvalues();
    CHECK((w.array() > 1e-9).count() <= 8);
}

TEST_CASE("true covariance matches a long sample average")
{
    const ArrayGeometry bs(16), ue(8);
    ChannelParams p;
    Rng path_rng(21);
    const PathSet paths = draw_paths(p, path_rng);

    // Accumulate in blocks to avoid holding 10^5 channel matrices.
    Rng gain_rng(22);
    CMat sample = CMat::Zero(128, 128);
    const int blocks = 20, per_block = 5000;
    for (int b = 0; b < blocks; ++b)
    {
        ChannelParams q = p;
        q.snapshots = per_block;
        const ChannelRealization ch = synthesize_channel(paths, draw_gains(q, gain_rng), 1.0, bs, ue);
        sample += sample_covariance(ch) * static_cast<double>(per_block);
    }
    sample /= static_cast<double>(blocks * per_block);
    const CMat R = true_covariance(paths, 1.0, bs, ue);
    CHECK((sample - R).norm() / R.norm() < 0.05);
}
