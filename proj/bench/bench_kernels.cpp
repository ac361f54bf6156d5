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

// Serial reference kernels against their OpenMP counterparts at the default scale
// (MN = 128, 256 atoms, 30 measurements per frame).

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include <offgrid/dictionary.hpp>
#include <offgrid/kernels.hpp>
#include <offgrid/rng.hpp>

using namespace offgrid;

namespace
{
struct Workload
{
    CMat psi;
    std::vector<CMat> phi;
    std::vector<CMat> sensed;
    std::vector<CVec> residuals;
    std::vector<CMat> covs;
};

CMat gaussian(Index rows, Index cols, Rng &rng)
{
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    CMat m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
        {
            const double re = n(rng);
            const double im = n(rng);
            m(i, j) = cd(re, im);
        }
    return m;
}

Workload make_workload(int frames)
{
    Rng rng(42);
    Workload w;
    w.psi = Dictionary(build_grid(GridScheme::UniformCosTheta, 16, 16), ArrayGeometry(16), ArrayGeometry(8)).psi();
    for (int t = 0; t < frames; ++t)
    {
        w.phi.push_back(gaussian(30, 128, rng));
        w.residuals.push_back(gaussian(30, 1, rng));
        const CVec y = w.residuals.back();
        w.covs.push_back(y * y.adjoint());
    }
    w.sensed = kernels::serial::sense_dictionary(w.phi, w.psi);
    return w;
}

template <auto Kernel>
void sense(benchmark::State &state)
{
    const Workload w = make_workload(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(Kernel(w.phi, w.psi));
}

template <auto Kernel>
void linear(benchmark::State &state)
{
    const Workload w = make_workload(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(Kernel(w.sensed, w.residuals));
}

template <auto Kernel>
void quadratic(benchmark::State &state)
{
    const Workload w = make_workload(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(Kernel(w.sensed, w.covs));
}
} // namespace

BENCHMARK(sense<kernels::serial::sense_dictionary>)->Name("sense_dictionary/serial")->Arg(10)->Arg(50);
BENCHMARK(sense<kernels::parallel::sense_dictionary>)->Name("sense_dictionary/parallel")->Arg(10)->Arg(50);
BENCHMARK(linear<kernels::serial::linear_scores>)->Name("linear_scores/serial")->Arg(10)->Arg(50);
BENCHMARK(linear<kernels::parallel::linear_scores>)->Name("linear_scores/parallel")->Arg(10)->Arg(50);
BENCHMARK(quadratic<kernels::serial::quadratic_scores>)->Name("quadratic_scores/serial")->Arg(10)->Arg(50);
BENCHMARK(quadratic<kernels::parallel::quadratic_scores>)->Name("quadratic_scores/parallel")->Arg(10)->Arg(50);

BENCHMARK_MAIN();
