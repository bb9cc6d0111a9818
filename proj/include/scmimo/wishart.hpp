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
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <string>

#include "scmimo/common.hpp"
#include "scmimo/rng.hpp"

namespace scmimo {

// The K x K Gram matrix W = A^T A* formed from an M x K matrix A with
// i.i.d. unit-variance circular complex Gaussian entries is a standard
// complex Wishart matrix with M degrees of freedom. Its unordered-eigenvalue
// density is a Laguerre-polynomial series; the precoder/detector scale
// factors are integrals of simple rational kernels against that density:
//
//   lambda_beta  = E[z / (z + sigma2)^2]   ->  beta_rzf  = 1/sqrt(lambda_beta)
//   lambda_alpha = E[1 / (z + sigma2)]     ->  alpha     = 1/(1 - sigma2*lambda_alpha)

/// Dimensions of the Wishart ensemble: rows = BS antennas M, cols = users K.
struct wishart_spec {
    int rows = 0;  // M
    int cols = 0;  // K

    void validate() const {
        if (cols < 1 || rows <= cols)
            throw config_error("wishart_spec: require M > K >= 1 (got M=" +
                               std::to_string(rows) + ", K=" + std::to_string(cols) + ")");
    }
};

/// Generalized Laguerre polynomial L_k^a(z) by the three-term recurrence
///   (k+1) L_{k+1}^a = (2k + 1 + a - z) L_k^a - (k + a) L_{k-1}^a.
inline double laguerre(int k, double a, double z) {
    if (k == 0) return 1.0;
    double lm1 = 1.0;           // L_0
    double l = 1.0 + a - z;     // L_1
    for (int i = 1; i < k; ++i) {
        const double lp1 = ((2.0 * i + 1.0 + a - z) * l - (i + a) * lm1) / (i + 1.0);
        lm1 = l;
        l = lp1;
    }
    return l;
}

/// Unordered-eigenvalue density of the standard complex Wishart matrix:
///   f(z) = (1/K) sum_{k=0}^{K-1} k!/(k+M-K)! (L_k^{M-K}(z))^2 z^{M-K} e^{-z}.
/// Factorial ratios and the z^{M-K} e^{-z} kernel are combined in the
/// log-gamma domain; at M-K = 48 the direct factorials would overflow.
inline double wishart_pdf(const wishart_spec& spec, double z) {
    spec.validate();
    if (z < 0.0) throw std::invalid_argument("wishart_pdf: z must be >= 0");
    const int m = spec.rows, k_dim = spec.cols;
    const double a = static_cast<double>(m - k_dim);
    if (z == 0.0) return 0.0;  // z^{M-K} factor, M > K
    double sum = 0.0;
    double lkm1 = 0.0, lk = 1.0;  // L_{k-1}, L_k starting at k = 0
    for (int k = 0; k < k_dim; ++k) {
        const double log_coeff =
            std::lgamma(k + 1.0) - std::lgamma(k + a + 1.0) + a * std::log(z) - z;
        sum += lk * lk * std::exp(log_coeff);
        const double lkp1 = ((2.0 * k + 1.0 + a - z) * lk - (k + a) * lkm1) / (k + 1.0);
        lkm1 = lk;
        lk = lkp1;
    }
    return sum / k_dim;
}

/// Upper integration limit: past this point the density tail is below ~1e-20.
/// The dominant tail term grows like z^{M+K-2} e^{-z} / (K (K-1)! (M-1)!),
/// so solve z - p*ln z = const by fixed point iteration.
inline double wishart_integration_bound(const wishart_spec& spec) {
    spec.validate();
    const double m = spec.rows, k = spec.cols;
    const double p = m + k - 1.0;  // one extra power as slack for the kernels
    const double c = 46.0 - std::log(k) - std::lgamma(k) - std::lgamma(m);
    double z = m + k + 50.0;
    for (int it = 0; it < 64; ++it) z = std::max(c + p * std::log(z), p + 1.0);
    const double edge = (std::sqrt(m) + std::sqrt(k)) * (std::sqrt(m) + std::sqrt(k));
    return std::max({z, edge + 10.0 * std::sqrt(m), 50.0});
}

namespace detail {

/// Adaptive Gauss-Kronrod on [0, z_max] with a relative-accuracy check.
template <class F>
double integrate_density_kernel(const wishart_spec& spec, F&& kernel, double rel_tol,
                                const char* what) {
    const double z_max = wishart_integration_bound(spec);
    double err_est = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double z) { return wishart_pdf(spec, z) * kernel(z); }, 0.0, z_max,
        /*max_depth=*/15, /*tol=*/rel_tol * 1e-2, &err_est);
    if (!std::isfinite(value) || err_est > rel_tol * std::max(std::abs(value), 1e-300)) {
        throw numeric_error(std::string(what) + ": quadrature did not converge (M=" +
                            std::to_string(spec.rows) + ", K=" + std::to_string(spec.cols) +
                            ", value=" + std::to_string(value) +
                            ", err=" + std::to_string(err_est) + ")");
    }
    return value;
}

}  // namespace detail

/// E[z/(z+sigma2)^2] under the eigenvalue density; relative accuracy 1e-8.
inline double compute_lambda_beta(const wishart_spec& spec, double sigma2_w,
                                  double rel_tol = 1e-8) {
    if (sigma2_w <= 0.0) throw std::invalid_argument("compute_lambda_beta: sigma2_w must be > 0");
    return detail::integrate_density_kernel(
        spec, [sigma2_w](double z) { return z / ((z + sigma2_w) * (z + sigma2_w)); }, rel_tol,
        "compute_lambda_beta");
}

/// E[1/(z+sigma2)] under the eigenvalue density; relative accuracy 1e-8.
inline double compute_lambda_alpha(const wishart_spec& spec, double sigma2_w,
                                   double rel_tol = 1e-8) {
    if (sigma2_w <= 0.0) throw std::invalid_argument("compute_lambda_alpha: sigma2_w must be > 0");
    return detail::integrate_density_kernel(
        spec, [sigma2_w](double z) { return 1.0 / (z + sigma2_w); }, rel_tol,
        "compute_lambda_alpha");
}

/// UE bias-removal factor alpha = 1/(1 - sigma2 * lambda_alpha).
inline double compute_alpha(double lambda_alpha, double sigma2_w) {
    const double x = sigma2_w * lambda_alpha;
    if (!(x > 0.0 && x < 1.0))
        throw numeric_error("compute_alpha: sigma2_w * lambda_alpha = " + std::to_string(x) +
                            " outside (0, 1); cannot happen for M > K");
    return 1.0 / (1.0 - x);
}

/// BS transmit scale factor beta_rzf = 1/sqrt(lambda_beta).
inline double compute_beta_rzf(double lambda_beta) {
    if (!(lambda_beta > 0.0))
        throw numeric_error("compute_beta_rzf: lambda_beta must be positive");
    return 1.0 / std::sqrt(lambda_beta);
}

/// ZF transmit scale factor sqrt(M - K).
inline double beta_zf(int num_antennas, int num_users) {
    wishart_spec{num_antennas, num_users}.validate();
    return std::sqrt(static_cast<double>(num_antennas - num_users));
}

/// Monte Carlo estimate with its standard error.
struct mc_estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t draws = 0;
};

/// Variance of the off-diagonal entries of T = W (W + sigma2 I)^{-1} over
/// random Wishart draws. Off-diagonal means are zero by symmetry, so the
/// variance is the mean of |T_ij|^2, i != j. Since T = I - sigma2 (W+sigma2 I)^{-1},
/// only the resolvent's off-diagonal entries are sampled.
inline mc_estimate compute_sigma2_od(const wishart_spec& spec, double sigma2_w,
                                     std::size_t draws, std::uint64_t seed) {
    spec.validate();
    if (sigma2_w < 0.0) throw std::invalid_argument("compute_sigma2_od: sigma2_w must be >= 0");
    if (draws < 1000) throw std::invalid_argument("compute_sigma2_od: need >= 1000 draws");
    const int m = spec.rows, k = spec.cols;
    if (k == 1) return {0.0, 0.0, draws};  // no off-diagonal entries
    rng_stream rng(seed);
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(k, k);
    Eigen::MatrixXcd a(m, k);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < k; ++j) a(i, j) = rng.cgaussian();
        const Eigen::MatrixXcd gram = a.transpose() * a.conjugate();
        const Eigen::MatrixXcd resolvent = (gram + sigma2_w * eye).llt().solve(eye);
        double acc = 0.0;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                if (i != j) acc += std::norm(resolvent(i, j));
        const double per_draw = sigma2_w * sigma2_w * acc / (k * (k - 1.0));
        sum += per_draw;
        sum_sq += per_draw * per_draw;
    }
    const double n = static_cast<double>(draws);
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    return {mean, std::sqrt(var / n), draws};
}

}  // namespace scmimo
