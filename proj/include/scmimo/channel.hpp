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

#include <Eigen/Dense>
#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "scmimo/common.hpp"
#include "scmimo/fft.hpp"
#include "scmimo/rng.hpp"

namespace scmimo {

/// Tap-power envelope of the random impulse responses.
struct power_delay_profile {
    enum class shape_kind { exponential };

    shape_kind shape = shape_kind::exponential;
    double rolloff = 25.0;  // samples
    int length = 130;       // number of taps L_h

    void validate() const {
        if (rolloff <= 0.0) throw config_error("power_delay_profile: rolloff must be > 0");
        if (length < 1) throw config_error("power_delay_profile: length must be >= 1");
    }

    /// Per-tap variances, normalized to sum to one.
    std::vector<double> tap_variances() const {
        validate();
        std::vector<double> v(static_cast<std::size_t>(length));
        double sum = 0.0;
        for (int l = 0; l < length; ++l) {
            v[static_cast<std::size_t>(l)] = std::exp(-static_cast<double>(l) / rolloff);
            sum += v[static_cast<std::size_t>(l)];
        }
        for (auto& x : v) x /= sum;
        return v;
    }
};

/// Impulse response between one BS antenna and one user.
struct channel_impulse {
    Eigen::VectorXcd taps;  // length L_h
    int antenna = 0;        // m in [0, M)
    int user = 0;           // k in [0, K)
};

/// One random channel draw: time-domain impulse responses plus the per-bin
/// frequency-domain matrices A_n (M x K, A_n(m,k) = n-th DFT coefficient of
/// the zero-padded impulse response between antenna m and user k).
/// Immutable after generation; safe to share across workers.
struct channel_realization {
    int num_antennas = 0;  // M
    int num_users = 0;     // K
    int fft_size = 0;      // N
    int impulse_length = 0;
    std::uint64_t seed = 0;
    std::vector<channel_impulse> impulses;       // M*K entries, index m*K + k
    std::vector<Eigen::MatrixXcd> bin_matrices;  // N matrices, each M x K

    const channel_impulse& impulse(int m, int k) const {
        return impulses[static_cast<std::size_t>(m) * static_cast<std::size_t>(num_users) +
                        static_cast<std::size_t>(k)];
    }
    const Eigen::MatrixXcd& bin(int n) const { return bin_matrices[static_cast<std::size_t>(n)]; }
};

struct channel_gen_options {
    /// Draw per-antenna power targets uniformly from [spread_lo, spread_hi];
    /// disabled leaves taps i.i.d. apart from the exact per-user mean-power
    /// normalization.
    bool per_antenna_power_spread = true;
    double spread_lo = 0.1;
    double spread_hi = 2.0;
};

/// Per-bin matrices from impulse responses via the fast transform.
inline std::vector<Eigen::MatrixXcd> to_frequency(const std::vector<channel_impulse>& impulses,
                                                  int num_antennas, int num_users, int fft_size) {
    if (impulses.size() !=
        static_cast<std::size_t>(num_antennas) * static_cast<std::size_t>(num_users))
        throw dimension_error("to_frequency: impulse grid does not match M x K");
    for (const auto& imp : impulses)
        if (imp.taps.size() > fft_size)
            throw config_error("to_frequency: impulse longer than FFT size");

    std::vector<Eigen::MatrixXcd> bins(static_cast<std::size_t>(fft_size),
                                       Eigen::MatrixXcd(num_antennas, num_users));
    Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(fft_size);
    for (int m = 0; m < num_antennas; ++m) {
        for (int k = 0; k < num_users; ++k) {
            const auto& imp =
                impulses[static_cast<std::size_t>(m) * static_cast<std::size_t>(num_users) +
                         static_cast<std::size_t>(k)];
            padded.setZero();
            padded.head(imp.taps.size()) = imp.taps;
            const Eigen::VectorXcd spectrum = dft(padded);
            for (int n = 0; n < fft_size; ++n)
                bins[static_cast<std::size_t>(n)](m, k) = spectrum(n);
        }
    }
    return bins;
}

/// Random frequency-selective channel. Tap l is CN(0, c*exp(-l/rolloff));
/// per-antenna powers are then pinned to uniform targets in [0.1, 2.0]
/// (when enabled) and every user's average power over the M antennas is
/// normalized to exactly one. Deterministic given the seed.
///
/// Draw order (fixed, part of the determinism contract): for each user,
/// first the M power targets, then antenna 0..M-1 taps.
inline channel_realization generate_channel(int num_antennas, int num_users, int fft_size,
                                            const power_delay_profile& pdp, std::uint64_t seed,
                                            const channel_gen_options& opts = {}) {
    if (num_users < 1 || num_antennas < num_users)
        throw config_error("generate_channel: require M >= K >= 1");
    pdp.validate();
    if (pdp.length > fft_size)
        throw config_error("generate_channel: impulse length exceeds FFT size");
    if (opts.per_antenna_power_spread &&
        (opts.spread_lo <= 0.0 || opts.spread_hi < opts.spread_lo))
        throw config_error("generate_channel: bad power spread range");

    const std::vector<double> var = pdp.tap_variances();
    channel_realization out;
    out.num_antennas = num_antennas;
    out.num_users = num_users;
    out.fft_size = fft_size;
    out.impulse_length = pdp.length;
    out.seed = seed;
    out.impulses.resize(static_cast<std::size_t>(num_antennas) *
                        static_cast<std::size_t>(num_users));

    rng_stream rng(seed);
    std::vector<double> target(static_cast<std::size_t>(num_antennas));
    for (int k = 0; k < num_users; ++k) {
        if (opts.per_antenna_power_spread) {
            for (int m = 0; m < num_antennas; ++m)
                target[static_cast<std::size_t>(m)] = rng.uniform(opts.spread_lo, opts.spread_hi);
        } else {
            for (int m = 0; m < num_antennas; ++m) target[static_cast<std::size_t>(m)] = 1.0;
        }

        double power_sum = 0.0;
        for (int m = 0; m < num_antennas; ++m) {
            auto& imp = out.impulses[static_cast<std::size_t>(m) *
                                         static_cast<std::size_t>(num_users) +
                                     static_cast<std::size_t>(k)];
            imp.antenna = m;
            imp.user = k;
            imp.taps.resize(pdp.length);
            double p = 0.0;
            for (int l = 0; l < pdp.length; ++l) {
                imp.taps(l) = rng.cgaussian(var[static_cast<std::size_t>(l)]);
                p += std::norm(imp.taps(l));
            }
            if (p <= 0.0) throw numeric_error("generate_channel: zero-power impulse draw");
            if (opts.per_antenna_power_spread) {
                imp.taps *= std::sqrt(target[static_cast<std::size_t>(m)] / p);
                p = target[static_cast<std::size_t>(m)];
            }
            power_sum += p;
        }
        // exact unity average power per user across the M antennas
        const double scale = 1.0 / std::sqrt(power_sum / num_antennas);
        for (int m = 0; m < num_antennas; ++m)
            out.impulses[static_cast<std::size_t>(m) * static_cast<std::size_t>(num_users) +
                         static_cast<std::size_t>(k)]
                .taps *= scale;
    }

    out.bin_matrices = to_frequency(out.impulses, num_antennas, num_users, fft_size);
    return out;
}

/// Circular convolution of x with an impulse response: the action of the
/// N x N circulant channel matrix on x, evaluated in the frequency domain.
inline Eigen::VectorXcd circular_convolve(const Eigen::VectorXcd& x,
                                          const channel_impulse& impulse) {
    const int n = static_cast<int>(x.size());
    if (impulse.taps.size() > n)
        throw dimension_error("circular_convolve: impulse longer than signal");
    Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(n);
    padded.head(impulse.taps.size()) = impulse.taps;
    return idft(dft(padded).cwiseProduct(dft(x)));
}

// --- debug dump format ----------------------------------------------------
// Little-endian binary: magic "SCMCHN1\0", u32 M, u32 K, u32 N, u32 L_h,
// u64 seed, then taps as f64 (re, im) pairs ordered antenna-major:
// (m=0,k=0) taps, (m=0,k=1) taps, ..., (m=M-1,k=K-1) taps.

namespace detail {
template <class T>
void put_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void get_raw(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}
inline void require_little_endian() {
    if constexpr (std::endian::native != std::endian::little)
        throw numeric_error("binary file formats require a little-endian host");
}
}  // namespace detail

inline void dump_channel(const channel_realization& ch, const std::filesystem::path& path) {
    detail::require_little_endian();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("dump_channel: cannot open " + path.string());
    os.write("SCMCHN1\0", 8);
    detail::put_raw(os, static_cast<std::uint32_t>(ch.num_antennas));
    detail::put_raw(os, static_cast<std::uint32_t>(ch.num_users));
    detail::put_raw(os, static_cast<std::uint32_t>(ch.fft_size));
    detail::put_raw(os, static_cast<std::uint32_t>(ch.impulse_length));
    detail::put_raw(os, static_cast<std::uint64_t>(ch.seed));
    for (const auto& imp : ch.impulses) {
        for (Eigen::Index l = 0; l < imp.taps.size(); ++l) {
            detail::put_raw(os, imp.taps(l).real());
            detail::put_raw(os, imp.taps(l).imag());
        }
    }
    if (!os) throw config_error("dump_channel: write failed for " + path.string());
}

inline channel_realization load_channel(const std::filesystem::path& path) {
    detail::require_little_endian();
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error("load_channel: cannot open " + path.string());
    char magic[8] = {};
    is.read(magic, 8);
    if (std::string(magic, 7) != "SCMCHN1")
        throw config_error("load_channel: bad magic in " + path.string());
    std::uint32_t m = 0, k = 0, n = 0, lh = 0;
    std::uint64_t seed = 0;
    detail::get_raw(is, m);
    detail::get_raw(is, k);
    detail::get_raw(is, n);
    detail::get_raw(is, lh);
    detail::get_raw(is, seed);
    channel_realization ch;
    ch.num_antennas = static_cast<int>(m);
    ch.num_users = static_cast<int>(k);
    ch.fft_size = static_cast<int>(n);
    ch.impulse_length = static_cast<int>(lh);
    ch.seed = seed;
    ch.impulses.resize(static_cast<std::size_t>(m) * static_cast<std::size_t>(k));
    for (std::uint32_t mi = 0; mi < m; ++mi) {
        for (std::uint32_t ki = 0; ki < k; ++ki) {
            auto& imp = ch.impulses[static_cast<std::size_t>(mi) * k + ki];
            imp.antenna = static_cast<int>(mi);
            imp.user = static_cast<int>(ki);
            imp.taps.resize(lh);
            for (std::uint32_t l = 0; l < lh; ++l) {
                double re = 0.0, im = 0.0;
                detail::get_raw(is, re);
                detail::get_raw(is, im);
                imp.taps(l) = {re, im};
            }
        }
    }
    if (!is) throw config_error("load_channel: truncated file " + path.string());
    ch.bin_matrices = to_frequency(ch.impulses, ch.num_antennas, ch.num_users, ch.fft_size);
    return ch;
}

}  // namespace scmimo
