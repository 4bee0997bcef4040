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

// Minimal dense complex vector/matrix support shared by all modules.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kronbf {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr Complex kJ{0.0, 1.0};

/// Column-major dense complex matrix.
class CMat {
  public:
    CMat() = default;
    CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static CMat identity(std::size_t n) {
        CMat I(n, n);
        for (std::size_t i = 0; i < n; ++i)
            I(i, i) = 1.0;
        return I;
    }

    static CMat from_columns(std::span<const CVec> columns) {
        if (columns.empty())
            return {};
        CMat A(columns.front().size(), columns.size());
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (columns[c].size() != A.rows_)
                throw std::invalid_argument("CMat::from_columns: ragged columns");
            A.set_col(c, columns[c]);
        }
        return A;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    Complex& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

    std::span<Complex> col_span(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
    std::span<const Complex> col_span(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }
    CVec col(std::size_t c) const {
        auto s = col_span(c);
        return {s.begin(), s.end()};
    }
    void set_col(std::size_t c, std::span<const Complex> v) {
        for (std::size_t r = 0; r < rows_; ++r)
            (*this)(r, c) = v[r];
    }

    const CVec& data() const { return data_; }
    CVec& data() { return data_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    CVec data_;
};

/// Conjugate-linear inner product aᴴb.
inline Complex vdot(std::span<const Complex> a, std::span<const Complex> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("vdot: length mismatch");
    Complex acc{};
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::conj(a[i]) * b[i];
    return acc;
}

inline double norm2(std::span<const Complex> a) {
    double acc = 0.0;
    for (const auto& x : a)
        acc += std::norm(x);
    return std::sqrt(acc);
}

inline double fro_norm(const CMat& A) { return norm2(A.data()); }

inline CMat adjoint(const CMat& A) {
    CMat B(A.cols(), A.rows());
    for (std::size_t c = 0; c < A.cols(); ++c)
        for (std::size_t r = 0; r < A.rows(); ++r)
            B(c, r) = std::conj(A(r, c));
    return B;
}

inline CMat matmul(const CMat& A, const CMat& B) {
    if (A.cols() != B.rows())
        throw std::invalid_argument("matmul: inner dimensions " + std::to_string(A.cols()) + " vs " +
                                    std::to_string(B.rows()));
    CMat C(A.rows(), B.cols());
    for (std::size_t j = 0; j < B.cols(); ++j)
        for (std::size_t k = 0; k < A.cols(); ++k) {
            const Complex b = B(k, j);
            if (b == Complex{})
                continue;
            for (std::size_t i = 0; i < A.rows(); ++i)
                C(i, j) += A(i, k) * b;
        }
    return C;
}

/// Aᴴ B without forming the adjoint.
inline CMat adjoint_matmul(const CMat& A, const CMat& B) {
    if (A.rows() != B.rows())
        throw std::invalid_argument("adjoint_matmul: row mismatch");
    CMat C(A.cols(), B.cols());
    for (std::size_t j = 0; j < B.cols(); ++j)
        for (std::size_t i = 0; i < A.cols(); ++i)
            C(i, j) = vdot(A.col_span(i), B.col_span(j));
    return C;
}

inline CVec matvec(const CMat& A, std::span<const Complex> x) {
    if (A.cols() != x.size())
        throw std::invalid_argument("matvec: dimension mismatch");
    CVec y(A.rows());
    for (std::size_t k = 0; k < A.cols(); ++k)
        for (std::size_t i = 0; i < A.rows(); ++i)
            y[i] += A(i, k) * x[k];
    return y;
}

/// Aᴴ x.
inline CVec adjoint_matvec(const CMat& A, std::span<const Complex> x) {
    if (A.rows() != x.size())
        throw std::invalid_argument("adjoint_matvec: dimension mismatch");
    CVec y(A.cols());
    for (std::size_t k = 0; k < A.cols(); ++k)
        y[k] = vdot(A.col_span(k), x);
    return y;
}

inline CMat operator+(const CMat& A, const CMat& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw std::invalid_argument("CMat +: shape mismatch");
    CMat C(A.rows(), A.cols());
    for (std::size_t c = 0; c < A.cols(); ++c)
        for (std::size_t r = 0; r < A.rows(); ++r)
            C(r, c) = A(r, c) + B(r, c);
    return C;
}

inline CMat operator-(const CMat& A, const CMat& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw std::invalid_argument("CMat -: shape mismatch");
    CMat C(A.rows(), A.cols());
    for (std::size_t c = 0; c < A.cols(); ++c)
        for (std::size_t r = 0; r < A.rows(); ++r)
            C(r, c) = A(r, c) - B(r, c);
    return C;
}

inline CMat operator*(Complex s, const CMat& A) {
    CMat C(A.rows(), A.cols());
    for (std::size_t c = 0; c < A.cols(); ++c)
        for (std::size_t r = 0; r < A.rows(); ++r)
            C(r, c) = s * A(r, c);
    return C;
}

/// Horizontal concatenation [A, B].
inline CMat hcat(const CMat& A, const CMat& B) {
    if (A.empty())
        return B;
    if (B.empty())
        return A;
    if (A.rows() != B.rows())
        throw std::invalid_argument("hcat: row mismatch");
    CMat C(A.rows(), A.cols() + B.cols());
    for (std::size_t c = 0; c < A.cols(); ++c)
        C.set_col(c, A.col_span(c));
    for (std::size_t c = 0; c < B.cols(); ++c)
        C.set_col(A.cols() + c, B.col_span(c));
    return C;
}

inline bool all_finite(std::span<const Complex> v) {
    for (const auto& x : v)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
            return false;
    return true;
}

} // namespace kronbf
