// SPDX-License-Identifier: Apache-2.0
//
// flexbeam: flexible beamforming for movable-antenna ISAC systems
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

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace flexbeam {

/// Deterministic, cross-platform random source.
///
/// The core generator is std::mt19937_64, whose output sequence for a given
/// 64-bit seed is pinned bit-exactly by the C++ standard. Distribution
/// mapping is done here instead of through std::uniform_real_distribution /
/// std::normal_distribution, whose outputs are implementation-defined:
///
///   uniform():    (x >> 11) * 2^-53          in [0, 1)
///   cgauss(v):    Box-Muller pair scaled by sqrt(v/2), CN(0, v)
///
/// Identical seeds therefore produce identical draws on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Circularly symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> cgauss(double variance) {
        double u1 = 1.0 - uniform(); // (0, 1], keeps the log finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double phase = 2.0 * M_PI * u2;
        double s = std::sqrt(variance / 2.0);
        return {s * r * std::cos(phase), s * r * std::sin(phase)};
    }

  private:
    std::mt19937_64 gen_;
};

/// Substream seed for scenario `index` under a master seed (SplitMix64 mix),
/// so every scenario draws from an independent, reproducible stream.
inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace flexbeam
