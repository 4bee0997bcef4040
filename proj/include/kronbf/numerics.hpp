// SPDX-License-Identifier: Apache-2.0
//
// kronbf: Kronecker-structured hybrid beamforming for multi-cell mmWave massive MIMO
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

// Small dense Hermitian eigensolver and Hermitian positive-definite solve.

#include "kronbf/errors.hpp"
#include "kronbf/linalg.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace kronbf {

/// Square matrix equal to its conjugate transpose. Input within 1e-10
/// (relative) of Hermitian is accepted and symmetrized.
class HermitianMatrix {
  public:
    explicit HermitianMatrix(CMat A) : A_(std::move(A)) {
        if (A_.rows() != A_.cols())
            throw std::invalid_argument("HermitianMatrix: not square");
        const double scale = std::max(1.0, fro_norm(A_));
        const std::size_t n = A_.rows();
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t r = 0; r <= c; ++r) {
                const Complex a = A_(r, c);
                const Complex b = std::conj(A_(c, r));
                if (std::abs(a - b) > 1e-10 * scale)
                    throw std::invalid_argument("HermitianMatrix: entry (" + std::to_string(r) + "," +
                                                std::to_string(c) + ") violates A = Aᴴ");
                const Complex m = 0.5 * (a + b);
                A_(r, c) = m;
                A_(c, r) = std::conj(m);
            }
        for (std::size_t i = 0; i < n; ++i)
            A_(i, i) = A_(i, i).real();
    }

    std::size_t dim() const { return A_.rows(); }
    const CMat& matrix() const { return A_; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return A_(r, c); }

  private:
    CMat A_;
};

struct EigenDecomposition {
    std::vector<double> values; ///< descending
    CMat vectors;               ///< column i pairs with values[i]
};

/// Full eigendecomposition by cyclic complex Jacobi rotations.
inline EigenDecomposition hermitian_eig(const HermitianMatrix& H, int max_sweeps = 100) {
    const std::size_t n = H.dim();
    CMat A = H.matrix();
    CMat V = CMat::identity(n);
    const double scale = std::max(fro_norm(A), std::numeric_limits<double>::min());

    auto off_norm = [&] {
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t r = 0; r < n; ++r)
                if (r != c)
                    acc += std::norm(A(r, c));
        return std::sqrt(acc);
    };

    bool converged = n < 2;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        if (off_norm() <= 1e-15 * scale) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex apq = A(p, q);
                const double b = std::abs(apq);
                if (b <= 1e-300)
                    continue;
                // U = diag(1, e^{-jφ}) · [[c, s], [-s, c]] with φ = arg(a_pq)
                // turns the (p,q) block into a real symmetric one and then
                // annihilates it.
                const Complex ph = std::conj(apq) / b;
                const double theta = 0.5 * std::atan2(2.0 * b, A(q, q).real() - A(p, p).real());
                const double c = std::cos(theta);
                const double s = std::sin(theta);
                const Complex u00 = c, u01 = s, u10 = -s * ph, u11 = c * ph;
                for (std::size_t r = 0; r < n; ++r) {
                    const Complex ap = A(r, p), aq = A(r, q);
                    A(r, p) = ap * u00 + aq * u10;
                    A(r, q) = ap * u01 + aq * u11;
                    const Complex vp = V(r, p), vq = V(r, q);
                    V(r, p) = vp * u00 + vq * u10;
                    V(r, q) = vp * u01 + vq * u11;
                }
                for (std::size_t col = 0; col < n; ++col) {
                    const Complex ap = A(p, col), aq = A(q, col);
                    A(p, col) = std::conj(u00) * ap + std::conj(u10) * aq;
                    A(q, col) = std::conj(u01) * ap + std::conj(u11) * aq;
                }
                A(p, q) = 0.0;
                A(q, p) = 0.0;
            }
    }
    if (!converged && off_norm() > 1e-15 * scale)
        throw NumericalError("hermitian_eig: no convergence after " + std::to_string(max_sweeps) + " sweeps");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return A(a, a).real() > A(b, b).real(); });
    EigenDecomposition out;
    out.values.resize(n);
    out.vectors = CMat(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = A(order[i], order[i]).real();
        out.vectors.set_col(i, V.col_span(order[i]));
    }
    return out;
}

struct EigPair {
    double value = 0.0;
    CVec vector;
};

/// Largest eigenvalue and a unit eigenvector. When the top eigenvalue is
/// repeated (relative gap < 1e-12), the returned vector is the one in the
/// top eigenspace with the largest-magnitude first coordinate (falling back
/// to later coordinates if the eigenspace is orthogonal to e₁). The vector is
/// phase-normalized so that its first non-negligible coordinate is real
/// positive.
inline EigPair top_eigpair(const HermitianMatrix& H) {
    const std::size_t n = H.dim();
    if (n == 0)
        throw std::invalid_argument("top_eigpair: empty matrix");
    const auto eig = hermitian_eig(H);
    const double lmax = eig.values.front();
    const double tie_tol = 1e-12 * std::max(std::abs(lmax), std::numeric_limits<double>::min());

    std::size_t multiplicity = 1;
    while (multiplicity < n && lmax - eig.values[multiplicity] < tie_tol)
        ++multiplicity;

    CVec v = eig.vectors.col(0);
    if (multiplicity > 1) {
        for (std::size_t axis = 0; axis < n; ++axis) {
            // Projection of e_axis onto the top eigenspace.
            CVec w(n);
            for (std::size_t i = 0; i < multiplicity; ++i) {
                const Complex coeff = std::conj(eig.vectors(axis, i));
                for (std::size_t r = 0; r < n; ++r)
                    w[r] += eig.vectors(r, i) * coeff;
            }
            const double nw = norm2(w);
            if (nw > 1e-8) {
                for (auto& x : w)
                    x /= nw;
                v = std::move(w);
                break;
            }
        }
    }

    for (const auto& x : v)
        if (std::abs(x) > 1e-12) {
            const Complex phase = std::conj(x) / std::abs(x);
            for (auto& y : v)
                y *= phase;
            break;
        }
    return {lmax, std::move(v)};
}

/// Lower-triangular Cholesky factor L with A = L Lᴴ. Pivots at or below
/// 64·ε·max_i A_ii are treated as zero (numerically singular).
inline CMat cholesky(const HermitianMatrix& H) {
    const std::size_t n = H.dim();
    const CMat& A = H.matrix();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        max_diag = std::max(max_diag, A(i, i).real());
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * max_diag;
    CMat L(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = A(j, j).real();
        for (std::size_t k = 0; k < j; ++k)
            d -= std::norm(L(j, k));
        if (!(d > floor) || !std::isfinite(d))
            throw NumericalError("cholesky: matrix is not positive definite (pivot " + std::to_string(j) +
                                 " = " + std::to_string(d) + ")");
        const double ljj = std::sqrt(d);
        L(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            Complex s = A(i, j);
            for (std::size_t k = 0; k < j; ++k)
                s -= L(i, k) * std::conj(L(j, k));
            L(i, j) = s / ljj;
        }
    }
    return L;
}

/// Solves A X = B for Hermitian positive-definite A.
inline CMat hpd_solve(const HermitianMatrix& A, const CMat& B) {
    if (B.rows() != A.dim())
        throw std::invalid_argument("hpd_solve: B has " + std::to_string(B.rows()) + " rows, expected " +
                                    std::to_string(A.dim()));
    const CMat L = cholesky(A);
    const std::size_t n = A.dim();
    CMat X = B;
    for (std::size_t c = 0; c < X.cols(); ++c) {
        auto x = X.col_span(c);
        for (std::size_t i = 0; i < n; ++i) {
            Complex s = x[i];
            for (std::size_t k = 0; k < i; ++k)
                s -= L(i, k) * x[k];
            x[i] = s / L(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            Complex s = x[i];
            for (std::size_t k = i + 1; k < n; ++k)
                s -= std::conj(L(k, i)) * x[k];
            x[i] = s / L(i, i);
        }
    }
    return X;
}

} // namespace kronbf
