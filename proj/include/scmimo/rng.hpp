// scmimo - single-carrier massive MIMO frequency-domain precoding simulator
// Copyright (C) 2025-2026 the scmimo authors
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
#include <cstdint>
#include <random>

#include "scmimo/common.hpp"

namespace scmimo {

/// splitmix64 finalizer; full-avalanche 64-bit mix used to derive seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and up to three
/// stream indices by chaining the finalizer. Parallel workers seeded this
/// way produce the same draws regardless of scheduling, so serial and
/// threaded runs are identical.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t s = mix64(master ^ 0x517cc1b727220a95ull);
    s = mix64(s ^ a);
    s = mix64(s ^ b);
    s = mix64(s ^ c);
    return s;
}

/// Seedable random stream. Uniform doubles are mapped from raw 64-bit output
/// and Gaussians come from Box-Muller, so the produced sequence depends only
/// on the mt19937_64 engine (which is specified bit-exactly by the standard),
/// not on library-specific distribution implementations.
class rng_stream {
  public:
    explicit rng_stream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; safe as a log() argument.
    double uniform_pos() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection-free modulo is fine here: n is tiny compared to 2^64
        return engine_() % n;
    }

    /// Standard normal via Box-Muller (second value cached).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * kPi * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    /// Circularly symmetric complex Gaussian CN(0, variance):
    /// variance/2 per real component.
    cxd cgaussian(double variance = 1.0) {
        const double s = std::sqrt(variance * 0.5);
        const double re = s * gaussian();
        const double im = s * gaussian();
        return {re, im};
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace scmimo
