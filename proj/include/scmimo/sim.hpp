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
#include <string>
#include <vector>

#include "scmimo/channel.hpp"
#include "scmimo/common.hpp"
#include "scmimo/detector.hpp"
#include "scmimo/parallel.hpp"
#include "scmimo/precoder.hpp"
#include "scmimo/rng.hpp"
#include "scmimo/scalar_table.hpp"

namespace scmimo {

enum class modulation { qpsk, qam16, qam64 };

inline const char* to_string(modulation m) {
    switch (m) {
        case modulation::qpsk: return "qpsk";
        case modulation::qam16: return "qam16";
        default: return "qam64";
    }
}

/// Unit-variance constellation symbols, one column per user.
inline Eigen::MatrixXcd make_symbols(rng_stream& rng, int n, int k, modulation mod) {
    int side = 2;
    double norm = std::sqrt(2.0);  // QPSK: E|s|^2 = 2 before scaling
    if (mod == modulation::qam16) {
        side = 4;
        norm = std::sqrt(10.0);
    } else if (mod == modulation::qam64) {
        side = 8;
        norm = std::sqrt(42.0);
    }
    Eigen::MatrixXcd s(n, k);
    for (int c = 0; c < k; ++c) {
        for (int r = 0; r < n; ++r) {
            const double re = 2.0 * static_cast<double>(rng.uniform_index(side)) - (side - 1);
            const double im = 2.0 * static_cast<double>(rng.uniform_index(side)) - (side - 1);
            s(r, c) = cxd(re, im) / norm;
        }
    }
    return s;
}

/// Full sweep configuration; defaults reproduce the reference scenario
/// (M=64, K=16, N=2048 samples per frame, exponential PDP with 25-sample
/// roll-off, 130-tap channels, 0-20 dB excess path loss, power optimization
/// on, QPSK, 50 frames per SNR point).
struct system_config {
    int m = 64;
    int k = 16;
    int n = 2048;
    int l_h = 130;
    int l_cp = 144;
    double pdp_rolloff = 25.0;
    bool channel_power_spread = true;
    std::vector<double> snr_db_grid = {-20, -15, -10, -5, 0, 5, 10, 15, 20, 25, 30};
    int frames_per_point = 50;
    bool run_zf = true;
    bool run_rzf = true;
    bool power_opt = true;
    double excess_path_loss_db_lo = 0.0;
    double excess_path_loss_db_hi = 20.0;
    modulation mod = modulation::qpsk;
    std::uint64_t seed = 1;
    unsigned threads = 0;

    void validate() const {
        if (k < 1 || m <= k) throw config_error("system_config: require M > K >= 1");
        if (l_h < 1) throw config_error("system_config: L_h must be >= 1");
        if (l_h > l_cp - 1) throw config_error("system_config: require L_h <= L_CP - 1");
        if (l_cp > n) throw config_error("system_config: require L_CP <= N");
        if (frames_per_point < 1) throw config_error("system_config: frames_per_point >= 1");
        if (!std::is_sorted(snr_db_grid.begin(), snr_db_grid.end()))
            throw config_error("system_config: SNR grid must be sorted ascending");
        if (excess_path_loss_db_lo < 0.0 || excess_path_loss_db_hi < excess_path_loss_db_lo)
            throw config_error("system_config: bad excess path loss range");
        if (!run_zf && !run_rzf) throw config_error("system_config: no precoder selected");
    }

    power_delay_profile pdp() const {
        power_delay_profile p;
        p.rolloff = pdp_rolloff;
        p.length = l_h;
        return p;
    }
};

/// Aggregated measurements for one (precoder, SNR point).
struct snr_point_record {
    precoder_kind kind = precoder_kind::rzf;
    double snr_db = 0.0;
    double sigma2_w = 0.0;
    int frames = 0;
    double mean_gain_db = 0.0;        // linear-domain average, then dB
    double mean_gain_db_dbavg = 0.0;  // dB-domain average of per-(frame,user) gains
    double gain_stderr_db = 0.0;      // from per-frame means
    Eigen::VectorXd per_user_sinr_db; // per-user mean SINR (linear mean, in dB)
    Eigen::VectorXcd mean_bias;       // per-user mean of <s_hat s*>/<|s|^2>
    double tx_power_ratio = 0.0;      // measured per-bin power / expected tr[P]
};

struct sim_result {
    system_config config;
    std::uint64_t seed = 0;
    complexity_report complexity;
    std::vector<snr_point_record> records;        // ZF block first, SNR ascending
    std::vector<std::string> invariant_failures;  // hard-invariant breaches, empty on success
};

namespace detail {

struct frame_stats {
    Eigen::VectorXd sinr;  // per user, linear
    Eigen::VectorXcd bias;
    double tx_power_ratio = 0.0;
};

/// Runs one channel realization through precode -> channel -> noise -> detect
/// for one precoder and returns per-user measurements.
inline frame_stats run_frame(const system_config& cfg, const channel_realization& chan,
                             precoder_kind kind, double sigma2_w, const scalar_entry* entry,
                             const power_allocation& alloc, const Eigen::MatrixXcd& symbols,
                             const Eigen::MatrixXcd& symbols_fd, const Eigen::MatrixXcd& noise_fd) {
    const int n = cfg.n, k = cfg.k;
    const double beta = (kind == precoder_kind::rzf) ? entry->beta_rzf : beta_zf(cfg.m, k);

    const Eigen::VectorXd scale = (kind == precoder_kind::rzf)
                                      ? detection_scale_rzf(*entry, alloc, sigma2_w)
                                      : detection_scale_zf(cfg.m, alloc);
    const Eigen::VectorXcd sqrt_q = alloc.q.array().sqrt().cast<cxd>();
    const Eigen::VectorXd inv_sqrt_p = alloc.p.array().rsqrt();

    Eigen::MatrixXcd s_hat_fd(n, k);
    double tx_power = 0.0;
    Eigen::MatrixXcd gram(k, k);
    for (int bin = 0; bin < n; ++bin) {
        const Eigen::MatrixXcd& a = chan.bin(bin);
        gram.noalias() = a.transpose() * a.conjugate();
        if (kind == precoder_kind::rzf) gram.diagonal().array() += sigma2_w;
        const auto llt = detail::factor_hpd(
            gram, kind == precoder_kind::rzf ? "rzf_precode_bin" : "zf_precode_bin");
        const Eigen::VectorXcd scaled = sqrt_q.cwiseProduct(symbols_fd.row(bin).transpose());
        const Eigen::VectorXcd x = beta * (a.conjugate() * llt.solve(scaled));
        tx_power += x.squaredNorm();
        const Eigen::VectorXcd received =
            inv_sqrt_p.cast<cxd>().cwiseProduct(a.transpose() * x) +
            noise_fd.row(bin).transpose();
        s_hat_fd.row(bin) = detect_bin(received, scale).transpose();
    }

    const Eigen::MatrixXcd s_hat = time_domain_symbols(s_hat_fd);
    const detection_result det = measure_sinr(symbols, s_hat);

    frame_stats out;
    out.sinr = det.sinr_per_user;
    out.bias = det.bias_per_user;
    // FD symbols carry variance N under the unnormalized forward transform,
    // so the expected per-bin transmit power is N * tr[P].
    out.tx_power_ratio = tx_power / (static_cast<double>(n) * n * alloc.p_total);
    return out;
}

}  // namespace detail

/// Monte Carlo sweep over the SNR grid. Frames run in parallel with per
/// (point, frame) derived RNG streams and slot-indexed aggregation, so the
/// result is independent of the thread count. Both precoders see identical
/// channels, path losses, symbols and noise.
inline sim_result run_sweep(const system_config& cfg, const scalar_table& table) {
    cfg.validate();
    if (cfg.run_rzf) {
        if (table.num_antennas != cfg.m)
            throw config_error("run_sweep: scalar table was built for M=" +
                               std::to_string(table.num_antennas) + ", config has M=" +
                               std::to_string(cfg.m));
        for (double snr : cfg.snr_db_grid)
            (void)lookup(table, cfg.k, sigma2_from_snr_db(snr));  // throws on coverage gap
    }

    const std::size_t n_pts = cfg.snr_db_grid.size();
    const std::size_t n_frames = static_cast<std::size_t>(cfg.frames_per_point);

    // scalar entries resolved once per point
    std::vector<scalar_entry> entries(n_pts);
    if (cfg.run_rzf)
        for (std::size_t si = 0; si < n_pts; ++si)
            entries[si] = lookup(table, cfg.k, sigma2_from_snr_db(cfg.snr_db_grid[si]));

    struct task_out {
        detail::frame_stats zf, rzf;
    };
    std::vector<task_out> slots(n_pts * n_frames);

    parallel_for(n_pts * n_frames, cfg.threads, [&](std::size_t idx) {
        const std::size_t si = idx / n_frames;
        const std::size_t fi = idx % n_frames;
        const double sigma2_w = sigma2_from_snr_db(cfg.snr_db_grid[si]);

        channel_gen_options copts;
        copts.per_antenna_power_spread = cfg.channel_power_spread;
        const channel_realization chan = generate_channel(
            cfg.m, cfg.k, cfg.n, cfg.pdp(), derive_seed(cfg.seed, 1, si, fi), copts);

        rng_stream path_rng(derive_seed(cfg.seed, 2, si, fi));
        Eigen::VectorXd p(cfg.k);
        for (int u = 0; u < cfg.k; ++u)
            p(u) = db_to_lin(path_rng.uniform(cfg.excess_path_loss_db_lo,
                                              cfg.excess_path_loss_db_hi));
        const power_allocation alloc_plain = power_allocation::from_path_loss(p);

        rng_stream sym_rng(derive_seed(cfg.seed, 3, si, fi));
        const Eigen::MatrixXcd symbols = make_symbols(sym_rng, cfg.n, cfg.k, cfg.mod);
        const Eigen::MatrixXcd symbols_fd = dft_cols(symbols);

        rng_stream noise_rng(derive_seed(cfg.seed, 4, si, fi));
        Eigen::MatrixXcd noise(cfg.n, cfg.k);
        for (int u = 0; u < cfg.k; ++u)
            for (int t = 0; t < cfg.n; ++t) noise(t, u) = noise_rng.cgaussian(sigma2_w);
        const Eigen::MatrixXcd noise_fd = dft_cols(noise);

        task_out& out = slots[idx];
        if (cfg.run_zf) {
            // sigma2_od = 0 for the interference-free ZF path, so the power
            // optimization formula collapses to q = p; use the plain allocation.
            out.zf = detail::run_frame(cfg, chan, precoder_kind::zf, sigma2_w, nullptr,
                                       alloc_plain, symbols, symbols_fd, noise_fd);
        }
        if (cfg.run_rzf) {
            const scalar_entry& e = entries[si];
            const power_allocation alloc =
                cfg.power_opt ? optimize_powers(p, e.sigma2_od, e.beta_rzf, sigma2_w)
                              : alloc_plain;
            out.rzf = detail::run_frame(cfg, chan, precoder_kind::rzf, sigma2_w, &e, alloc,
                                        symbols, symbols_fd, noise_fd);
        }
    });

    sim_result result;
    result.config = cfg;
    result.seed = cfg.seed;
    result.complexity = complexity(cfg.m, cfg.k);

    auto aggregate = [&](precoder_kind kind) {
        for (std::size_t si = 0; si < n_pts; ++si) {
            const double sigma2_w = sigma2_from_snr_db(cfg.snr_db_grid[si]);
            snr_point_record rec;
            rec.kind = kind;
            rec.snr_db = cfg.snr_db_grid[si];
            rec.sigma2_w = sigma2_w;
            rec.frames = cfg.frames_per_point;
            Eigen::VectorXd user_sum = Eigen::VectorXd::Zero(cfg.k);
            Eigen::VectorXcd bias_sum = Eigen::VectorXcd::Zero(cfg.k);
            double gain_sum = 0.0, gain_sq = 0.0, db_sum = 0.0, tx_sum = 0.0;
            for (std::size_t fi = 0; fi < n_frames; ++fi) {
                const detail::frame_stats& fs =
                    (kind == precoder_kind::zf) ? slots[si * n_frames + fi].zf
                                                : slots[si * n_frames + fi].rzf;
                user_sum += fs.sinr;
                bias_sum += fs.bias;
                tx_sum += fs.tx_power_ratio;
                const double g = sigma2_w * fs.sinr.mean();
                gain_sum += g;
                gain_sq += g * g;
                for (int u = 0; u < cfg.k; ++u)
                    db_sum += lin_to_db(sigma2_w * fs.sinr(u));
            }
            const double nf = static_cast<double>(n_frames);
            const double gain = gain_sum / nf;
            const double var = std::max(0.0, gain_sq / nf - gain * gain);
            rec.mean_gain_db = lin_to_db(gain);
            rec.mean_gain_db_dbavg = db_sum / (nf * cfg.k);
            rec.gain_stderr_db =
                (10.0 / std::log(10.0)) * std::sqrt(var / nf) / std::max(gain, 1e-300);
            rec.per_user_sinr_db = (user_sum / nf).array().log10() * 10.0;
            rec.mean_bias = bias_sum / nf;
            rec.tx_power_ratio = tx_sum / nf;
            if (!std::isfinite(rec.mean_gain_db))
                result.invariant_failures.push_back("non-finite gain at " +
                                                    std::to_string(rec.snr_db) + " dB");
            if (std::abs(rec.tx_power_ratio - 1.0) > 0.15)
                result.invariant_failures.push_back(
                    std::string(to_string(kind)) + " transmit power off by " +
                    std::to_string(100.0 * (rec.tx_power_ratio - 1.0)) + "% at " +
                    std::to_string(rec.snr_db) + " dB");
            result.records.push_back(std::move(rec));
        }
    };
    if (cfg.run_zf) aggregate(precoder_kind::zf);
    if (cfg.run_rzf) aggregate(precoder_kind::rzf);
    return result;
}

// --- frequency-domain model validation --------------------------------------

struct fd_model_report {
    double max_abs_error = 0.0;
    double tolerance = 1e-9;
    bool pass = false;
};

/// Drives one noise-free frame through the explicit time-domain path
/// (CP add, linear convolution, CP strip) and through the per-bin
/// frequency-domain product, and compares the received time-domain signals.
/// Brute-force path, so keep N small (<= 256).
inline fd_model_report validate_fd_model_impl(const channel_realization& chan, int l_cp,
                                              std::uint64_t symbol_seed,
                                              double tolerance = 1e-9) {
    const int n = chan.fft_size, m = chan.num_antennas, k = chan.num_users;
    if (n > 256) throw config_error("validate_fd_model: brute-force path requires N <= 256");
    if (l_cp < 1 || l_cp > n) throw config_error("validate_fd_model: require 1 <= L_CP <= N");

    rng_stream rng(symbol_seed);
    const Eigen::MatrixXcd symbols = make_symbols(rng, n, k, modulation::qpsk);
    const Eigen::MatrixXcd symbols_fd = dft_cols(symbols);
    const power_allocation alloc = power_allocation::uniform(k, k);

    // precode all bins (RZF with a fixed unit regularizer; any precoder works
    // here since both paths share the same transmit signal)
    Eigen::MatrixXcd x_fd(n, m);
    for (int bin = 0; bin < n; ++bin) {
        const Eigen::VectorXcd s_bin = symbols_fd.row(bin).transpose();
        x_fd.row(bin) = rzf_precode_bin(chan.bin(bin), s_bin, alloc, 1.0, 1.0).transpose();
    }

    // frequency-domain path: per-bin channel product, then inverse transform
    Eigen::MatrixXcd r_fd(n, k);
    for (int bin = 0; bin < n; ++bin)
        r_fd.row(bin) = (chan.bin(bin).transpose() * x_fd.row(bin).transpose()).transpose();
    Eigen::MatrixXcd r_fast = idft_cols(r_fd);
    for (int u = 0; u < k; ++u) r_fast.col(u) /= std::sqrt(alloc.p(u));

    // time-domain path: per-antenna waveform, CP, linear convolution, strip
    const Eigen::MatrixXcd x_time = idft_cols(x_fd);
    Eigen::MatrixXcd r_slow = Eigen::MatrixXcd::Zero(n, k);
    const int lh = chan.impulse_length;
    std::vector<cxd> tx(static_cast<std::size_t>(l_cp + n));
    for (int ant = 0; ant < m; ++ant) {
        for (int t = 0; t < l_cp; ++t) tx[static_cast<std::size_t>(t)] = x_time(n - l_cp + t, ant);
        for (int t = 0; t < n; ++t) tx[static_cast<std::size_t>(l_cp + t)] = x_time(t, ant);
        for (int u = 0; u < k; ++u) {
            const auto& taps = chan.impulse(ant, u).taps;
            for (int t = 0; t < n; ++t) {
                cxd acc = 0.0;
                const int abs_t = l_cp + t;  // receiver window starts after the CP
                for (int l = 0; l < lh; ++l) {
                    const int src = abs_t - l;
                    if (src >= 0) acc += taps(l) * tx[static_cast<std::size_t>(src)];
                }
                r_slow(t, u) += acc;
            }
        }
    }
    for (int u = 0; u < k; ++u) r_slow.col(u) /= std::sqrt(alloc.p(u));

    fd_model_report rep;
    rep.tolerance = tolerance;
    rep.max_abs_error = (r_fast - r_slow).cwiseAbs().maxCoeff();
    rep.pass = rep.max_abs_error < tolerance;
    return rep;
}

/// Config-level entry point: draws a small channel from the config's channel
/// parameters (clamped to the brute-force size) and validates the model.
inline fd_model_report validate_fd_model(const system_config& cfg,
                                         const channel_realization& chan,
                                         double tolerance = 1e-9) {
    return validate_fd_model_impl(chan, cfg.l_cp, derive_seed(cfg.seed, 9), tolerance);
}

}  // namespace scmimo
