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

#ifndef OFFGRID_RNG_HPP
#define OFFGRID_RNG_HPP

#include <cstdint>
#include <random>

namespace offgrid
{
using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to decorrelate neighbouring counter values.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent random streams of a single trial.
enum class Stream : std::uint64_t
{
    Paths = 1,
    Gains = 2,
    Beamformers = 3,
    Noise = 4,
};

// Counter-based seed: trial_seed = base_seed + trial, each stream is a hash of
// (trial_seed, stream id). Adding trials never changes the streams of earlier ones.
constexpr std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t trial, Stream stream)
{
    return splitmix64(splitmix64(base_seed + trial) ^ (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL));
}

inline Rng make_rng(std::uint64_t base_seed, std::uint64_t trial, Stream stream)
{
    return Rng(stream_seed(base_seed, trial, stream));
}
} // namespace offgrid

#endif
