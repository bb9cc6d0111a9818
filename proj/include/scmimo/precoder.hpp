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

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cstdint>
#include <limits>
#include <string>

#include "scmimo/common.hpp"

namespace scmimo {

enum class precoder_kind { zf, rzf };

inline const char* to_string(precoder_kind k) { return k == precoder_kind::zf ? "zf" : "rzf"; }

/// Per-user large-scale powers p_k and the transmit powers q_k actually
/// applied at the BS. q == p unless optimize_powers() was used.
struct power_allocation {
    Eigen::VectorXd p;  // path-loss powers, linear
    Eigen::VectorXd q;  // transmit powers, linear
    double p_total = 0.0;

    static power_allocation from_path_loss(const Eigen::VectorXd& p) {
        if (p.size() < 1 || (p.array() <= 0.0).any())
            throw config_error("power_allocation: all p_k must be > 0");
        power_allocation a;
        a.p = p;
        a.q = p;
        a.p_total = p.sum();
        return a;
    }

    static power_allocation uniform(int num_users, double total) {
        return from_path_loss(Eigen::VectorXd::Constant(num_users, total / num_users));
    }
};

/// Transmit powers equalizing the per-user output SINR under unequal path
/// loss:
///   q_k = (sigma2_od p_total + p_k sigma2_w / beta^2) /
///         (K sigma2_od + sigma2_w / beta^2),
/// which preserves sum(q) = sum(p) = p_total exactly.
inline power_allocation optimize_powers(const Eigen::VectorXd& p, double sigma2_od,
                                        double beta_rzf, double sigma2_w) {
    power_allocation alloc = power_allocation::from_path_loss(p);
    if (sigma2_od < 0.0) throw config_error("optimize_powers: sigma2_od must be >= 0");
    const double k = static_cast<double>(p.size());
    const double noise_over_beta2 = sigma2_w / (beta_rzf * beta_rzf);
    const double denom = k * sigma2_od + noise_over_beta2;
    if (!(denom > 0.0) || !std::isfinite(denom))
        throw config_error("optimize_powers: degenerate configuration "
                           "(sigma2_od and sigma2_w both zero)");
    alloc.q = (sigma2_od * alloc.p_total + p.array() * noise_over_beta2) / denom;
    return alloc;
}

namespace detail {

inline void check_bin_shapes(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& s,
                             const power_allocation& alloc) {
    if (a.rows() < a.cols()) throw dimension_error("precode: need M >= K bin matrix");
    if (s.size() != a.cols()) throw dimension_error("precode: symbol vector must have K entries");
    if (alloc.q.size() != a.cols())
        throw dimension_error("precode: power allocation must have K entries");
}

/// Cholesky of a Hermitian positive-definite K x K matrix; reports a
/// condition estimate if the factorization fails (singular Gram).
inline Eigen::LLT<Eigen::MatrixXcd> factor_hpd(const Eigen::MatrixXcd& w, const char* what) {
    Eigen::LLT<Eigen::MatrixXcd> llt(w);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(w, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        const double cond = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
        throw numeric_error(std::string(what) + ": Gram matrix not positive definite "
                            "(condition estimate " + std::to_string(cond) + ")");
    }
    return llt;
}

}  // namespace detail

/// Gram matrix W = A^T A* of one bin; Hermitian positive semidefinite, and
/// positive definite almost surely for M > K. Shared by both precoders and
/// equal, entrywise, to the conjugate of the uplink MMSE Gram.
inline Eigen::MatrixXcd bin_gram(const Eigen::MatrixXcd& a) {
    return a.transpose() * a.conjugate();
}

/// ZF precoding of one bin:
///   x = beta_zf A* (A^T A*)^{-1} Q^{1/2} s.
/// The Cholesky solve replaces the explicit inverse. After the channel,
/// Q^{-1/2} A^T x equals beta_zf * s exactly (zero multi-user interference).
inline Eigen::VectorXcd zf_precode_bin(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& s,
                                       const power_allocation& alloc, double beta_zf_value) {
    detail::check_bin_shapes(a, s, alloc);
    const Eigen::MatrixXcd gram = bin_gram(a);
    const auto llt = detail::factor_hpd(gram, "zf_precode_bin");
    const Eigen::VectorXcd scaled = alloc.q.array().sqrt().cast<cxd>() * s.array();
    return beta_zf_value * (a.conjugate() * llt.solve(scaled));
}

/// RZF precoding of one bin with the K x K regularized inverse:
///   x = beta_rzf A* (A^T A* + sigma2_w I_K)^{-1} Q^{1/2} s.
/// The regularized Gram is Hermitian positive definite for sigma2_w > 0; its
/// factorization is exactly the complex conjugate of the uplink detector's,
/// which is why the complexity accounting charges the K^3 cost to the uplink.
inline Eigen::VectorXcd rzf_precode_bin(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& s,
                                        const power_allocation& alloc, double sigma2_w,
                                        double beta_rzf_value) {
    detail::check_bin_shapes(a, s, alloc);
    if (!(sigma2_w > 0.0)) throw config_error("rzf_precode_bin: sigma2_w must be > 0");
    Eigen::MatrixXcd gram = bin_gram(a);
    gram.diagonal().array() += sigma2_w;
    const auto llt = detail::factor_hpd(gram, "rzf_precode_bin");
    const Eigen::VectorXcd scaled = alloc.q.array().sqrt().cast<cxd>() * s.array();
    return beta_rzf_value * (a.conjugate() * llt.solve(scaled));
}

/// RZF via the M x M regularized inverse,
///   x = beta_rzf (A* A^T + sigma2_w I_M)^{-1} A* Q^{1/2} s.
/// Algebraically identical to rzf_precode_bin by the matrix inversion lemma;
/// kept as the independent route for validation, never used in the data path.
inline Eigen::VectorXcd rzf_precode_bin_direct(const Eigen::MatrixXcd& a,
                                               const Eigen::VectorXcd& s,
                                               const power_allocation& alloc, double sigma2_w,
                                               double beta_rzf_value) {
    detail::check_bin_shapes(a, s, alloc);
    if (!(sigma2_w > 0.0)) throw config_error("rzf_precode_bin_direct: sigma2_w must be > 0");
    Eigen::MatrixXcd big = a.conjugate() * a.transpose();
    big.diagonal().array() += sigma2_w;
    const Eigen::VectorXcd scaled = alloc.q.array().sqrt().cast<cxd>() * s.array();
    const Eigen::VectorXcd rhs = a.conjugate() * scaled;
    return beta_rzf_value * big.llt().solve(rhs);
}

/// Exact complex-multiply counts per frequency bin. The RZF column omits the
/// Gram build and K x K inversion because the downlink reuses (conjugates)
/// the factorization already produced by the uplink detector.
struct complexity_report {
    int num_antennas = 0;  // M
    int num_users = 0;     // K
    std::int64_t zf_multiplies_per_bin = 0;
    std::int64_t rzf_multiplies_per_bin = 0;
};

inline complexity_report complexity(int num_antennas, int num_users) {
    if (num_users < 1 || num_antennas <= num_users)
        throw config_error("complexity: require M > K >= 1");
    const std::int64_t m = num_antennas, k = num_users;
    complexity_report r;
    r.num_antennas = num_antennas;
    r.num_users = num_users;
    r.zf_multiplies_per_bin = k * k + k * m + k * k * k + k * k * m;
    r.rzf_multiplies_per_bin = k * k + k * m;
    return r;
}

}  // namespace scmimo
