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
#include <unsupported/Eigen/FFT>

#include "scmimo/common.hpp"

namespace scmimo {

// Transform convention used throughout the project:
//   forward:  X[n] = sum_t x[t] exp(-j 2 pi n t / N)      (unnormalized)
//   inverse:  x[t] = (1/N) sum_n X[n] exp(+j 2 pi n t / N)
// Parseval under this convention: sum_t |x[t]|^2 = (1/N) sum_n |X[n]|^2.
// Channel eigenvalues are therefore the plain N-point DFT of the impulse
// response; the unitary-DFT scaling never appears in the data path.

namespace detail {
inline Eigen::FFT<double>& fft_engine() {
    thread_local Eigen::FFT<double> engine;  // caches twiddle plans per size
    return engine;
}
}  // namespace detail

/// Forward DFT of a complex vector (fast transform, any length).
inline Eigen::VectorXcd dft(const Eigen::VectorXcd& x) {
    Eigen::VectorXcd out(x.size());
    detail::fft_engine().fwd(out, x);
    return out;
}

/// Inverse DFT with 1/N scaling.
inline Eigen::VectorXcd idft(const Eigen::VectorXcd& x) {
    Eigen::VectorXcd out(x.size());
    detail::fft_engine().inv(out, x);
    return out;
}

/// Column-wise forward DFT.
inline Eigen::MatrixXcd dft_cols(const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd out(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        Eigen::VectorXcd col = x.col(c);
        out.col(c) = dft(col);
    }
    return out;
}

/// Column-wise inverse DFT.
inline Eigen::MatrixXcd idft_cols(const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd out(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        Eigen::VectorXcd col = x.col(c);
        out.col(c) = idft(col);
    }
    return out;
}

}  // namespace scmimo
