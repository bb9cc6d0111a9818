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
#include <cmath>

#include "scmimo/common.hpp"
#include "scmimo/fft.hpp"
#include "scmimo/precoder.hpp"
#include "scmimo/scalar_table.hpp"

namespace scmimo {

/// Reported SINR is capped here when the residual error is exactly zero.
inline constexpr double kSinrCap = 1e12;

/// Per-user receive scale factors (alpha / beta) * sqrt(p_k / q_k).
/// alpha removes the multiplicative bias of the regularized precoder, beta
/// undoes the BS transmit scaling, and sqrt(p_k/q_k) compensates the
/// optimized power reallocation. ZF path: alpha = 1, beta = sqrt(M - K).
/// The scalar entry must come from the same sigma2_w the precoder used.
inline Eigen::VectorXd detection_scale_rzf(const scalar_entry& entry,
                                           const power_allocation& alloc,
                                           double sigma2_w_used) {
    const double rel = std::abs(entry.sigma2_w - sigma2_w_used) /
                       std::max(sigma2_w_used, 1e-300);
    if (rel > 1e-6)
        throw config_error("detection_scale_rzf: scalar entry was computed for sigma2_w=" +
                           std::to_string(entry.sigma2_w) + " but the precoder used " +
                           std::to_string(sigma2_w_used));
    return (entry.alpha / entry.beta_rzf) * (alloc.p.array() / alloc.q.array()).sqrt();
}

inline Eigen::VectorXd detection_scale_zf(int num_antennas, const power_allocation& alloc) {
    const double beta = beta_zf(num_antennas, static_cast<int>(alloc.p.size()));
    return (1.0 / beta) * (alloc.p.array() / alloc.q.array()).sqrt();
}

/// One-bin detection: elementwise per-user scaling of the received bin.
inline Eigen::VectorXcd detect_bin(const Eigen::VectorXcd& r, const Eigen::VectorXd& scale) {
    if (r.size() != scale.size()) throw dimension_error("detect_bin: K mismatch");
    return scale.cast<cxd>().asDiagonal() * r;
}

/// Convenience form matching the harness call site (RZF path).
inline Eigen::VectorXcd detect_bin(const Eigen::VectorXcd& r, const scalar_entry& entry,
                                   const power_allocation& alloc, double sigma2_w_used) {
    return detect_bin(r, detection_scale_rzf(entry, alloc, sigma2_w_used));
}

/// Inverse transform of the per-user FD estimates back to time domain.
inline Eigen::MatrixXcd time_domain_symbols(const Eigen::MatrixXcd& s_hat_fd) {
    return idft_cols(s_hat_fd);
}

/// Per-user symbol quality: multiplicative bias, bias-corrected SINR, raw
/// MSE and EVM. Columns are users, rows are symbols.
struct detection_result {
    Eigen::MatrixXcd s_hat;
    Eigen::VectorXcd bias_per_user;   // <s_hat s*> / <|s|^2>
    Eigen::VectorXd sinr_per_user;    // linear, bias-corrected
    Eigen::VectorXd evm_per_user;     // sqrt(raw MSE / symbol power)
    Eigen::VectorXd raw_mse_per_user; // <|s_hat - s|^2>
};

/// Separates the multiplicative bias from the residual error so the
/// reported SINR matches the unbiased analytical value:
///   bias_k = <s_hat s*> / <|s|^2>
///   sinr_k = <|s|^2> |bias_k|^2 / <|s_hat - bias_k s|^2>.
inline detection_result measure_sinr(const Eigen::MatrixXcd& s, const Eigen::MatrixXcd& s_hat) {
    if (s.rows() != s_hat.rows() || s.cols() != s_hat.cols())
        throw dimension_error("measure_sinr: shape mismatch");
    const Eigen::Index n = s.rows(), k = s.cols();
    if (n == 0) throw dimension_error("measure_sinr: empty input");

    detection_result res;
    res.s_hat = s_hat;
    res.bias_per_user.resize(k);
    res.sinr_per_user.resize(k);
    res.evm_per_user.resize(k);
    res.raw_mse_per_user.resize(k);

    for (Eigen::Index u = 0; u < k; ++u) {
        const double power = s.col(u).squaredNorm() / n;
        if (!(power > 0.0))
            throw numeric_error("measure_sinr: zero-power reference symbols for user " +
                                std::to_string(u));
        // Eigen's dot() conjugates its first argument
        const cxd bias = std::conj(s_hat.col(u).dot(s.col(u))) / (power * n);
        const double resid = (s_hat.col(u) - bias * s.col(u)).squaredNorm() / n;
        const double raw = (s_hat.col(u) - s.col(u)).squaredNorm() / n;
        res.bias_per_user(u) = bias;
        res.raw_mse_per_user(u) = raw;
        res.evm_per_user(u) = std::sqrt(raw / power);
        const double sig = power * std::norm(bias);
        res.sinr_per_user(u) = resid > sig / kSinrCap ? sig / resid : kSinrCap;
    }
    return res;
}

}  // namespace scmimo
