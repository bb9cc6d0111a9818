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
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace scmimo {

using cxd = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Invalid user-supplied configuration (dimensions, grids, file contents).
class config_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to reach its accuracy target or hit a
/// singular/degenerate input.
class numeric_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Vector/matrix shape mismatch between caller and callee.
class dimension_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// dB <-> linear helpers. Input SNR convention: snr_lin = 1/sigma2_w.
inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double sigma2_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }
inline double snr_db_from_sigma2(double s2) { return -10.0 * std::log10(s2); }

/// FNV-1a, used to stamp outputs with a hash of the effective config.
inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace scmimo
