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

// Kronecker products of phase vectors, prime-length (primitive) factorization
// of phase ramps, and the index permutations that exchange two factors of a
// Kronecker chain.

#include "kronbf/linalg.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kronbf {

inline constexpr double kUnitModulusTol = 1e-12;

/// A complex vector whose entries all have modulus one.
class PhaseVector {
  public:
    PhaseVector() : entries_{Complex{1.0, 0.0}} {}

    explicit PhaseVector(CVec entries) : entries_(std::move(entries)) {
        if (entries_.empty())
            throw std::invalid_argument("PhaseVector: empty");
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (std::abs(std::abs(entries_[i]) - 1.0) > kUnitModulusTol)
                throw std::invalid_argument("PhaseVector: entry " + std::to_string(i) + " has modulus " +
                                            std::to_string(std::abs(entries_[i])));
    }

    static PhaseVector from_phases(std::span<const double> phases) {
        CVec v(phases.size());
        for (std::size_t i = 0; i < phases.size(); ++i)
            v[i] = std::polar(1.0, phases[i]);
        return PhaseVector(std::move(v));
    }

    static PhaseVector ones(std::size_t n) { return PhaseVector(CVec(n, Complex{1.0, 0.0})); }

    std::size_t size() const { return entries_.size(); }
    const CVec& entries() const { return entries_; }
    std::span<const Complex> span() const { return entries_; }
    const Complex& operator[](std::size_t i) const { return entries_[i]; }

    friend bool operator==(const PhaseVector&, const PhaseVector&) = default;

  private:
    CVec entries_;
};

/// Phase ramp [1, e^{jθ}, …, e^{j(n−1)θ}].
inline CVec ramp(double theta, std::size_t n) {
    CVec v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::polar(1.0, static_cast<double>(i) * theta);
    return v;
}

inline CVec kron(std::span<const Complex> a, std::span<const Complex> b) {
    CVec out(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            out[i * b.size() + j] = a[i] * b[j];
    return out;
}

/// Prime factorization by trial division, ascending.
inline std::vector<std::size_t> prime_factors(std::size_t n) {
    if (n == 0)
        throw std::invalid_argument("prime_factors: n must be positive");
    std::vector<std::size_t> out;
    for (std::size_t p = 2; p * p <= n; ++p)
        while (n % p == 0) {
            out.push_back(p);
            n /= p;
        }
    if (n > 1)
        out.push_back(n);
    return out;
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Ordered Kronecker factors f_1 ⊗ f_2 ⊗ … ⊗ f_D. An empty chain denotes the
/// scalar 1 (total length 1).
class KroneckerChain {
  public:
    KroneckerChain() = default;
    explicit KroneckerChain(std::vector<PhaseVector> factors) : factors_(std::move(factors)) {
        for (const auto& f : factors_)
            total_len_ *= f.size();
    }

    const std::vector<PhaseVector>& factors() const { return factors_; }
    std::size_t num_factors() const { return factors_.size(); }
    std::size_t total_len() const { return total_len_; }
    const PhaseVector& operator[](std::size_t d) const { return factors_[d]; }

    std::vector<std::size_t> lengths() const {
        std::vector<std::size_t> out;
        out.reserve(factors_.size());
        for (const auto& f : factors_)
            out.push_back(f.size());
        return out;
    }

    void swap_factors(std::size_t p, std::size_t q) { std::swap(factors_.at(p), factors_.at(q)); }

    /// Sub-chain of factors [first, last).
    KroneckerChain slice(std::size_t first, std::size_t last) const {
        return KroneckerChain(std::vector<PhaseVector>(factors_.begin() + static_cast<std::ptrdiff_t>(first),
                                                       factors_.begin() + static_cast<std::ptrdiff_t>(last)));
    }

    KroneckerChain concat(const KroneckerChain& tail) const {
        auto f = factors_;
        f.insert(f.end(), tail.factors_.begin(), tail.factors_.end());
        return KroneckerChain(std::move(f));
    }

  private:
    std::vector<PhaseVector> factors_;
    std::size_t total_len_ = 1;
};

inline CVec materialize(const KroneckerChain& chain) {
    CVec out{Complex{1.0, 0.0}};
    for (const auto& f : chain.factors())
        out = kron(out, f.span());
    return out;
}

/// Primitive decomposition of the ramp [1, e^{jθ}, …, e^{j(n−1)θ}] into
/// prime-length ramps. Factors are in ascending length; factor d carries the
/// phase increment θ·(product of the lengths to its right), so the largest
/// stride sits first.
inline KroneckerChain primitive_decompose_ramp(double theta, std::size_t n) {
    if (n == 0)
        throw std::invalid_argument("primitive_decompose_ramp: n must be positive");
    if (n == 1)
        return KroneckerChain({PhaseVector::ones(1)});
    const auto lengths = prime_factors(n);
    std::vector<PhaseVector> factors(lengths.size());
    std::size_t stride = 1;
    for (std::size_t d = lengths.size(); d-- > 0;) {
        factors[d] = PhaseVector(ramp(theta * static_cast<double>(stride), lengths[d]));
        stride *= lengths[d];
    }
    return KroneckerChain(std::move(factors));
}

/// Permutation of {0,…,n−1} acting as (P x)[i] = x[index_map[i]].
class FactorPermutation {
  public:
    FactorPermutation() = default;
    explicit FactorPermutation(std::vector<std::size_t> index_map) : map_(std::move(index_map)) {
        std::vector<bool> seen(map_.size(), false);
        for (auto m : map_) {
            if (m >= map_.size() || seen[m])
                throw std::invalid_argument("FactorPermutation: index map is not a bijection");
            seen[m] = true;
        }
    }

    static FactorPermutation identity(std::size_t n) {
        std::vector<std::size_t> m(n);
        std::iota(m.begin(), m.end(), std::size_t{0});
        return FactorPermutation(std::move(m));
    }

    std::size_t size() const { return map_.size(); }
    const std::vector<std::size_t>& index_map() const { return map_; }

    bool is_identity() const {
        for (std::size_t i = 0; i < map_.size(); ++i)
            if (map_[i] != i)
                return false;
        return true;
    }

    /// P x.
    CVec apply(std::span<const Complex> x) const {
        if (x.size() != map_.size())
            throw std::invalid_argument("FactorPermutation::apply: length mismatch");
        CVec y(x.size());
        for (std::size_t i = 0; i < map_.size(); ++i)
            y[i] = x[map_[i]];
        return y;
    }

    /// Pᵀ y (the inverse permutation).
    CVec apply_transpose(std::span<const Complex> y) const {
        if (y.size() != map_.size())
            throw std::invalid_argument("FactorPermutation::apply_transpose: length mismatch");
        CVec x(y.size());
        for (std::size_t i = 0; i < map_.size(); ++i)
            x[map_[i]] = y[i];
        return x;
    }

    /// this · rhs.
    FactorPermutation then(const FactorPermutation& rhs) const {
        if (rhs.size() != size())
            throw std::invalid_argument("FactorPermutation::then: size mismatch");
        std::vector<std::size_t> m(map_.size());
        for (std::size_t i = 0; i < map_.size(); ++i)
            m[i] = rhs.map_[map_[i]];
        return FactorPermutation(std::move(m));
    }

    /// Dense 0/1 matrix, row i has its one in column index_map[i].
    CMat dense() const {
        CMat P(map_.size(), map_.size());
        for (std::size_t i = 0; i < map_.size(); ++i)
            P(i, map_[i]) = 1.0;
        return P;
    }

    friend bool operator==(const FactorPermutation&, const FactorPermutation&) = default;

  private:
    std::vector<std::size_t> map_;
};

/// Permutation P with materialize(original) = P · materialize(original with
/// factors p and q exchanged), for any factors of the given lengths.
inline FactorPermutation swap_permutation(std::span<const std::size_t> lengths, std::size_t p, std::size_t q) {
    if (p == q)
        throw std::invalid_argument("swap_permutation: p and q must differ");
    if (p >= lengths.size() || q >= lengths.size())
        throw std::invalid_argument("swap_permutation: factor index out of range");
    const std::size_t k = lengths.size();
    std::vector<std::size_t> swapped(lengths.begin(), lengths.end());
    std::swap(swapped[p], swapped[q]);

    auto strides_of = [k](const std::vector<std::size_t>& lens) {
        std::vector<std::size_t> s(k);
        std::size_t acc = 1;
        for (std::size_t d = k; d-- > 0;) {
            s[d] = acc;
            acc *= lens[d];
        }
        return s;
    };
    const std::vector<std::size_t> orig_len(lengths.begin(), lengths.end());
    const auto swap_stride = strides_of(swapped);
    const std::size_t total = std::accumulate(orig_len.begin(), orig_len.end(), std::size_t{1}, std::multiplies<>());

    std::vector<std::size_t> map(total);
    std::vector<std::size_t> digit(k, 0);
    for (std::size_t lin = 0; lin < total; ++lin) {
        // Digits of the original multi-index; positions p and q trade places
        // in the swapped layout.
        std::size_t target = 0;
        for (std::size_t d = 0; d < k; ++d) {
            const std::size_t pos = d == p ? q : (d == q ? p : d);
            target += digit[d] * swap_stride[pos];
        }
        map[lin] = target;
        for (std::size_t d = k; d-- > 0;) {
            if (++digit[d] < orig_len[d])
                break;
            digit[d] = 0;
        }
    }
    return FactorPermutation(std::move(map));
}

} // namespace kronbf
