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

// Hybrid beamformers for the uplink of a multi-cell mmWave UPA receiver.
//
// Each analog column f_RF(k) is a Kronecker product of prime-length phase
// factors. Γ of those factors are nulling factors, each orthogonal to the
// matching factor of one interference steering vector, which annihilates that
// interference path exactly. The remaining factors are merged into one
// phase-matched enhancement block. Which factor nulls which interference path
// is chosen greedily from a measure matrix (dynamic allocation), by exhaustive
// search, or in natural order (successive allocation). The digital stage is a
// K×K linear MMSE combiner on the analog outputs.

#include "kronbf/channel_model.hpp"
#include "kronbf/errors.hpp"
#include "kronbf/kron_algebra.hpp"
#include "kronbf/linalg.hpp"
#include "kronbf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kronbf {

/// Fault injection for verification runs.
struct BuildOptions {
    /// Replace every nulling factor diag(a)·t by diag(a)·1 (sign of the
    /// alternating entries flipped), which no longer nulls anything.
    bool corrupt_nulling = false;
};

struct FactorAssignment {
    /// (factor index d, interference component ε), in selection order.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;

    std::vector<bool> designed_mask(std::size_t D) const {
        std::vector<bool> m(D, false);
        for (const auto& [d, e] : pairs)
            m.at(d) = true;
        return m;
    }

    /// Factor index nulling component ε.
    std::size_t factor_for(std::size_t eps) const {
        for (const auto& [d, e] : pairs)
            if (e == eps)
                return d;
        throw std::out_of_range("FactorAssignment: component " + std::to_string(eps) + " is unassigned");
    }

    friend bool operator==(const FactorAssignment&, const FactorAssignment&) = default;
};

/// Nonnegative D×Γ score table.
class MeasureMatrix {
  public:
    MeasureMatrix(std::size_t D, std::size_t gamma) : D_(D), gamma_(gamma), u_(D * gamma, 0.0) {}
    std::size_t rows() const { return D_; }
    std::size_t cols() const { return gamma_; }
    double& operator()(std::size_t d, std::size_t e) { return u_[d * gamma_ + e]; }
    double operator()(std::size_t d, std::size_t e) const { return u_[d * gamma_ + e]; }

  private:
    std::size_t D_;
    std::size_t gamma_;
    std::vector<double> u_;
};

struct AnalogColumn {
    PhaseVector f_RF;
    FactorAssignment assignment;
    FactorPermutation permutation;          ///< f_RF = P · (f′_Γ ⊗ f′_Res)
    std::vector<PhaseVector> gamma_factors; ///< rearranged nulling factors f′_Γ
    std::vector<PhaseVector> res_factors;   ///< enhancement block f′_Res (a single phase-matched vector)
};

struct HybridBeamformer {
    CMat F_RF; ///< MN × K, unit-modulus entries
    CMat F_BB; ///< K × K
    std::vector<AnalogColumn> columns;

    /// Effective combiner W = F_RF F_BB, column k is w_k.
    CMat combiner() const { return matmul(F_RF, F_BB); }
};

/// One flattened interference path ε = Σ_{i<ψ} Γ_i + γ.
struct InterferenceComponent {
    std::size_t psi = 0;
    std::size_t gamma = 0;
    PathAngles angles;
    KroneckerChain factors;
};

inline std::vector<InterferenceComponent> interference_components(const Scenario& s, const ArrayGeometry& g) {
    std::vector<InterferenceComponent> out;
    for (std::size_t psi = 0; psi < s.interferers.size(); ++psi)
        for (std::size_t gam = 0; gam < s.interferers[psi].paths.size(); ++gam) {
            const auto& a = s.interferers[psi].paths[gam].angles;
            out.push_back({psi, gam, a, upa_factors(a, g)});
        }
    return out;
}

/// Kronecker factors of every data path of one user together with the
/// per-path complex weight that multiplies them in G_k v_k.
struct DataPathFactors {
    std::vector<KroneckerChain> chains;
    std::vector<Complex> weights;
};

/// α̃_kl = α_kl a_tᴴ(φ_kl^t) v_k.
inline Complex effective_path_gain(const Path& p, const CVec& v, const ArrayGeometry& g) {
    return p.alpha * vdot(ula_steering(p.angles.phi_t, g).span(), v);
}

inline DataPathFactors data_path_factors_full(const UserChannel& u, const ArrayGeometry& g) {
    DataPathFactors out;
    for (const auto& p : u.paths) {
        out.chains.push_back(upa_factors(p.angles, g));
        out.weights.push_back(effective_path_gain(p, u.v, g));
    }
    return out;
}

/// LoS path only, unit weight.
inline DataPathFactors data_path_factors_los(const UserChannel& u, const ArrayGeometry& g) {
    return {{upa_factors(u.paths.front().angles, g)}, {Complex{1.0, 0.0}}};
}

/// diag(a)·t with t the n-th roots of unity; orthogonal to `a`.
inline PhaseVector nulling_factor(const PhaseVector& a, const BuildOptions& opt = {}) {
    const std::size_t n = a.size();
    if (n < 2)
        throw std::invalid_argument("nulling_factor: a length-1 factor cannot be nulled");
    CVec f(n);
    for (std::size_t m = 0; m < n; ++m) {
        const Complex t = opt.corrupt_nulling ? Complex{1.0, 0.0}
                          : (n == 2)          ? Complex{m == 0 ? 1.0 : -1.0, 0.0}
                                              : std::polar(1.0, kTwoPi * static_cast<double>(m) / static_cast<double>(n));
        f[m] = a[m] * t;
    }
    return PhaseVector(std::move(f));
}

/// candidates[d][ε]: the factor that, placed at position d, nulls component ε.
using CandidateTable = std::vector<std::vector<PhaseVector>>;

inline CandidateTable candidate_factors(const std::vector<InterferenceComponent>& comps, std::size_t D,
                                        const BuildOptions& opt = {}) {
    CandidateTable t(D);
    for (std::size_t d = 0; d < D; ++d)
        for (const auto& c : comps)
            t[d].push_back(nulling_factor(c.factors[d], opt));
    return t;
}

/// Principal D-th root of a complex number.
inline Complex principal_root(Complex z, std::size_t D) {
    if (D == 0 || z == Complex{})
        return z;
    const double inv = 1.0 / static_cast<double>(D);
    return std::polar(std::pow(std::abs(z), inv), std::arg(z) * inv);
}

/// u[d][ε] = |(f_ε^(d))ᴴ Σ_l w_l^{1/D} a_l^(d)|.
inline MeasureMatrix measure_matrix(const CandidateTable& candidates, const DataPathFactors& data, std::size_t D) {
    const std::size_t gamma = candidates.empty() ? 0 : candidates.front().size();
    MeasureMatrix U(D, gamma);
    for (std::size_t d = 0; d < D; ++d) {
        CVec combined(data.chains.front()[d].size());
        for (std::size_t l = 0; l < data.chains.size(); ++l) {
            const Complex w = principal_root(data.weights[l], D);
            const auto& a = data.chains[l][d];
            for (std::size_t i = 0; i < combined.size(); ++i)
                combined[i] += w * a[i];
        }
        for (std::size_t e = 0; e < gamma; ++e)
            U(d, e) = std::abs(vdot(candidates[d][e].span(), combined));
    }
    return U;
}

/// Measure matrix over all data paths of user k, weighted by α̃_kl.
inline MeasureMatrix measure_matrix_full(const CandidateTable& candidates, const DataPathFactors& full_paths) {
    return measure_matrix(candidates, full_paths, full_paths.chains.front().num_factors());
}

/// Measure matrix against the LoS path factors alone, unweighted.
inline MeasureMatrix measure_matrix_los(const CandidateTable& candidates, const KroneckerChain& los_factors) {
    return measure_matrix(candidates, {{los_factors}, {Complex{1.0, 0.0}}}, los_factors.num_factors());
}

/// Greedy allocation: repeatedly take the largest remaining u[d][ε] and
/// retire row d and column ε. Ties go to the smallest d, then smallest ε.
inline FactorAssignment allocate_factors(const MeasureMatrix& U) {
    const std::size_t D = U.rows();
    const std::size_t gamma = U.cols();
    if (D < gamma)
        throw InfeasibleConfiguration("allocate_factors: " + std::to_string(D) + " factors cannot null " +
                                      std::to_string(gamma) + " interference components");
    std::vector<bool> row_used(D, false), col_used(gamma, false);
    FactorAssignment out;
    for (std::size_t it = 0; it < gamma; ++it) {
        std::size_t bd = D, be = gamma;
        double best = -1.0;
        for (std::size_t d = 0; d < D; ++d) {
            if (row_used[d])
                continue;
            for (std::size_t e = 0; e < gamma; ++e) {
                if (col_used[e])
                    continue;
                const double u = U(d, e);
                if (!std::isfinite(u))
                    throw std::invalid_argument("allocate_factors: non-finite measure entry");
                if (u > best) {
                    best = u;
                    bd = d;
                    be = e;
                }
            }
        }
        row_used[bd] = true;
        col_used[be] = true;
        out.pairs.emplace_back(bd, be);
    }
    return out;
}

struct Rearrangement {
    FactorPermutation permutation; ///< materialize(original) = P · materialize(reordered)
    std::vector<PhaseVector> factors;
    std::vector<bool> designed_mask;
    std::vector<KroneckerChain> data_chains;
};

/// Two-pointer sweep moving every designed factor to the front. Each exchange
/// is mirrored on every data chain and folded into the composite permutation.
inline Rearrangement rearrange(std::vector<PhaseVector> factors, std::vector<bool> designed,
                               std::vector<KroneckerChain> data_chains) {
    if (designed.size() != factors.size())
        throw std::invalid_argument("rearrange: mask length differs from factor count");
    std::size_t total = 1;
    std::vector<std::size_t> lengths;
    for (const auto& f : factors) {
        lengths.push_back(f.size());
        total *= f.size();
    }
    auto P = FactorPermutation::identity(total);
    if (factors.size() >= 2) {
        std::size_t i = 0, j = factors.size() - 1;
        while (j > i) {
            if (!designed[i] && designed[j]) {
                P = P.then(swap_permutation(lengths, i, j));
                std::swap(factors[i], factors[j]);
                std::swap(lengths[i], lengths[j]);
                std::swap(designed[i], designed[j]);
                for (auto& c : data_chains)
                    c.swap_factors(i, j);
            } else if (designed[i] && designed[j]) {
                ++i;
            } else if (!designed[i] && !designed[j]) {
                --j;
            } else {
                ++i;
                --j;
            }
        }
    }
    return {std::move(P), std::move(factors), std::move(designed), std::move(data_chains)};
}

/// exp(j·angle(g)); zero entries map to 1.
inline PhaseVector phase_match(std::span<const Complex> g) {
    CVec f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        f[i] = g[i] == Complex{} ? Complex{1.0, 0.0} : g[i] / std::abs(g[i]);
    return PhaseVector(std::move(f));
}

/// g̃ = Σ_l w_l ((f′_Γ)ᴴ a′_{l,Γ}) a′_{l,Res} over rearranged data chains.
inline CVec enhancement_target(std::span<const PhaseVector> gamma_factors,
                               std::span<const KroneckerChain> rearranged_chains, std::span<const Complex> weights) {
    const std::size_t n_gamma = gamma_factors.size();
    CVec g;
    for (std::size_t l = 0; l < rearranged_chains.size(); ++l) {
        const auto& chain = rearranged_chains[l];
        Complex coeff = weights[l];
        for (std::size_t d = 0; d < n_gamma; ++d)
            coeff *= vdot(gamma_factors[d].span(), chain[d].span());
        const CVec tail = materialize(chain.slice(n_gamma, chain.num_factors()));
        if (g.empty())
            g.assign(tail.size(), Complex{});
        for (std::size_t i = 0; i < tail.size(); ++i)
            g[i] += coeff * tail[i];
    }
    return g;
}

/// Phase-matched enhancement block against every data path (weights α̃_kl).
inline PhaseVector enhance_full(std::span<const PhaseVector> gamma_factors,
                                std::span<const KroneckerChain> rearranged_chains, std::span<const Complex> weights) {
    return phase_match(enhancement_target(gamma_factors, rearranged_chains, weights));
}

/// Phase-matched enhancement block against the LoS path only.
inline PhaseVector enhance_los(std::span<const PhaseVector> gamma_factors, const KroneckerChain& rearranged_los) {
    const Complex one{1.0, 0.0};
    return phase_match(enhancement_target(gamma_factors, std::span<const KroneckerChain>(&rearranged_los, 1),
                                          std::span<const Complex>(&one, 1)));
}

/// Nulling, rearrangement, enhancement and recomposition for one user and a
/// fixed assignment.
inline AnalogColumn build_column(const FactorAssignment& assignment, const CandidateTable& candidates,
                                 const DataPathFactors& data) {
    const auto& ref = data.chains.front();
    const std::size_t D = ref.num_factors();
    std::vector<PhaseVector> factors;
    factors.reserve(D);
    for (std::size_t d = 0; d < D; ++d)
        factors.push_back(PhaseVector::ones(ref[d].size()));
    for (const auto& [d, e] : assignment.pairs)
        factors[d] = candidates[d][e];

    auto r = rearrange(std::move(factors), assignment.designed_mask(D), data.chains);
    const std::size_t n_gamma = assignment.pairs.size();
    std::vector<PhaseVector> gamma_factors(r.factors.begin(), r.factors.begin() + static_cast<std::ptrdiff_t>(n_gamma));
    auto res = enhance_full(gamma_factors, r.data_chains, data.weights);

    CVec rearranged = kron(materialize(KroneckerChain(gamma_factors)), res.span());
    AnalogColumn col{PhaseVector(r.permutation.apply(rearranged)), assignment, std::move(r.permutation),
                     std::move(gamma_factors), {std::move(res)}};
    return col;
}

/// Factor lengths of the receive array in decomposition order.
inline std::vector<std::size_t> array_factor_lengths(const ArrayGeometry& g) {
    return upa_factors(kPi / 2, kPi / 2, g).lengths();
}

inline std::size_t ceil_log2(std::size_t k) {
    std::size_t b = 0;
    while ((std::size_t{1} << b) < k)
        ++b;
    return b;
}

/// Nulling Γ paths while leaving room to separate K users requires the
/// product of the D−Γ smallest factor lengths to reach K; for MN = 2^D this
/// is D ≥ Γ + ⌈log₂K⌉.
inline void check_feasible(const ArrayGeometry& g, std::size_t K, std::size_t gamma) {
    auto lengths = array_factor_lengths(g);
    const std::size_t D = lengths.size();
    auto fail = [&](const std::string& why) {
        throw InfeasibleConfiguration("infeasible antenna configuration (M=" + std::to_string(g.M) +
                                      ", N=" + std::to_string(g.N) + ", D=" + std::to_string(D) +
                                      ", Gamma=" + std::to_string(gamma) + ", K=" + std::to_string(K) + "): " + why +
                                      "; with power-of-two arrays MN must be at least 2^(Gamma+ceil(log2 K)) = " +
                                      std::to_string(std::size_t{1} << (gamma + ceil_log2(K))));
    };
    if (D < gamma)
        fail("fewer Kronecker factors than interference paths");
    std::sort(lengths.begin(), lengths.end());
    std::size_t dof = 1;
    for (std::size_t d = 0; d < D - gamma; ++d)
        dof *= lengths[d];
    if (dof < K)
        fail("remaining enhancement dimension " + std::to_string(dof) + " < K");
}

namespace detail {

inline CMat columns_to_matrix(const std::vector<AnalogColumn>& cols) {
    std::vector<CVec> v;
    v.reserve(cols.size());
    for (const auto& c : cols)
        v.push_back(c.f_RF.entries());
    return CMat::from_columns(v);
}

} // namespace detail

/// Linear MMSE digital combiner on the analog outputs:
/// F_BB = P_U · C⁻¹ · F_RFᴴ G_eff, with
/// C = P_U (F_RFᴴG_eff)(·)ᴴ + P_I (F_RFᴴH)(·)ᴴ + N0 F_RFᴴF_RF.
inline CMat mmse_digital(const CMat& F_RF, const Scenario& s) {
    const CMat A = adjoint_matmul(F_RF, s.effective_channels());
    CMat C = Complex{s.P_U} * matmul(A, adjoint(A)) + Complex{s.N0} * adjoint_matmul(F_RF, F_RF);
    if (!s.interferers.empty()) {
        const CMat B = adjoint_matmul(F_RF, s.interference_matrix());
        C = C + Complex{s.P_I} * matmul(B, adjoint(B));
    }
    try {
        return hpd_solve(HermitianMatrix(std::move(C)), Complex{s.P_U} * A);
    } catch (const NumericalError& e) {
        throw InfeasibleConfiguration(std::string("mmse_digital: analog beamformer is rank deficient (") + e.what() +
                                      ")");
    }
}

/// Fully digital MMSE combiner (MN × K), P_U C⁻¹ G_eff with
/// C = P_U G_eff G_effᴴ + P_I H Hᴴ + N0 I, evaluated through the
/// matrix-inversion lemma so only a (K+Ψ)-dimensional system is factored.
inline CMat mmse_full_digital(const Scenario& s) {
    const CMat G = s.effective_channels();
    CMat U = Complex{std::sqrt(s.P_U)} * G;
    if (!s.interferers.empty())
        U = hcat(U, Complex{std::sqrt(s.P_I)} * s.interference_matrix());
    CMat S = adjoint_matmul(U, U);
    for (std::size_t i = 0; i < S.rows(); ++i)
        S(i, i) += s.N0;
    const CMat Y = hpd_solve(HermitianMatrix(std::move(S)), adjoint_matmul(U, G));
    return Complex{s.P_U / s.N0} * (G - matmul(U, Y));
}

inline double analog_gain(const PhaseVector& f_RF, std::span<const Complex> g) {
    return std::norm(vdot(f_RF.span(), g));
}

inline HybridBeamformer assemble(std::vector<AnalogColumn> cols, const Scenario& s) {
    HybridBeamformer bf;
    bf.F_RF = detail::columns_to_matrix(cols);
    bf.F_BB = mmse_digital(bf.F_RF, s);
    bf.columns = std::move(cols);
    return bf;
}

/// Dynamic Kronecker factor allocation with full-CSI measure and enhancement.
inline HybridBeamformer build_alg3(const Scenario& s, const ArrayGeometry& g, const BuildOptions& opt = {}) {
    const auto comps = interference_components(s, g);
    check_feasible(g, s.num_users(), comps.size());
    const std::size_t D = array_factor_lengths(g).size();
    const auto candidates = candidate_factors(comps, D, opt);
    std::vector<AnalogColumn> cols;
    for (const auto& u : s.users) {
        const auto data = data_path_factors_full(u, g);
        const auto assignment = allocate_factors(measure_matrix_full(candidates, data));
        cols.push_back(build_column(assignment, candidates, data));
    }
    return assemble(std::move(cols), s);
}

/// Analog stage driven by AoAs only (LoS measure and LoS enhancement); the
/// cached analog columns are reused unless an AoA changed. The digital stage
/// is always recomputed from the current channels.
inline HybridBeamformer build_alg4(const Scenario& s, const ArrayGeometry& g,
                                   const std::vector<AnalogColumn>* cached = nullptr, bool aoa_changed = true,
                                   const BuildOptions& opt = {}) {
    if (cached != nullptr && !aoa_changed) {
        if (cached->size() != s.num_users())
            throw std::invalid_argument("build_alg4: cached analog stage has " + std::to_string(cached->size()) +
                                        " columns for " + std::to_string(s.num_users()) + " users");
        return assemble(*cached, s);
    }
    const auto comps = interference_components(s, g);
    check_feasible(g, s.num_users(), comps.size());
    const std::size_t D = array_factor_lengths(g).size();
    const auto candidates = candidate_factors(comps, D, opt);
    std::vector<AnalogColumn> cols;
    for (const auto& u : s.users) {
        const auto los = data_path_factors_los(u, g);
        const auto assignment = allocate_factors(measure_matrix_los(candidates, los.chains.front()));
        cols.push_back(build_column(assignment, candidates, los));
    }
    return assemble(std::move(cols), s);
}

/// Number of injective maps from Γ components to D factors, D!/(D−Γ)!.
inline double exhaustive_candidate_count(std::size_t D, std::size_t gamma) {
    double n = 1.0;
    for (std::size_t i = 0; i < gamma; ++i)
        n *= static_cast<double>(D - i);
    return n;
}

inline constexpr double kExhaustiveLimit = 1e6;

/// Best assignment per user by enumerating every injective component→factor
/// map and keeping the one with the largest |f_RFᴴ G_k v_k|².
inline HybridBeamformer baseline_exhaustive(const Scenario& s, const ArrayGeometry& g, const BuildOptions& opt = {}) {
    const auto comps = interference_components(s, g);
    check_feasible(g, s.num_users(), comps.size());
    const std::size_t D = array_factor_lengths(g).size();
    const std::size_t gamma = comps.size();
    if (exhaustive_candidate_count(D, gamma) > kExhaustiveLimit)
        throw InfeasibleConfiguration("baseline_exhaustive: " + std::to_string(exhaustive_candidate_count(D, gamma)) +
                                      " assignments exceed the search limit");
    const auto candidates = candidate_factors(comps, D, opt);

    std::vector<AnalogColumn> cols;
    for (const auto& u : s.users) {
        const auto data = data_path_factors_full(u, g);
        const CVec target = u.effective();
        std::optional<AnalogColumn> best;
        double best_gain = -1.0;
        FactorAssignment current;
        std::vector<bool> used(D, false);
        std::function<void(std::size_t)> visit = [&](std::size_t eps) {
            if (eps == gamma) {
                auto col = build_column(current, candidates, data);
                const double gain = analog_gain(col.f_RF, target);
                if (gain > best_gain) {
                    best_gain = gain;
                    best = std::move(col);
                }
                return;
            }
            for (std::size_t d = 0; d < D; ++d) {
                if (used[d])
                    continue;
                used[d] = true;
                current.pairs.emplace_back(d, eps);
                visit(eps + 1);
                current.pairs.pop_back();
                used[d] = false;
            }
        };
        visit(0);
        cols.push_back(std::move(*best));
    }
    return assemble(std::move(cols), s);
}

/// Component ε nulled by factor ε, in natural order, with no measure matrix.
inline HybridBeamformer baseline_successive_khb(const Scenario& s, const ArrayGeometry& g,
                                                const BuildOptions& opt = {}) {
    const auto comps = interference_components(s, g);
    check_feasible(g, s.num_users(), comps.size());
    const std::size_t D = array_factor_lengths(g).size();
    const auto candidates = candidate_factors(comps, D, opt);
    FactorAssignment natural;
    for (std::size_t e = 0; e < comps.size(); ++e)
        natural.pairs.emplace_back(e, e);
    std::vector<AnalogColumn> cols;
    for (const auto& u : s.users)
        cols.push_back(build_column(natural, candidates, data_path_factors_full(u, g)));
    return assemble(std::move(cols), s);
}

/// Equal-gain (phase-matched) analog combining, no nulling, MMSE digital stage.
inline HybridBeamformer baseline_egc(const Scenario& s) {
    std::vector<CVec> cols;
    for (const auto& u : s.users)
        cols.push_back(phase_match(u.effective()).entries());
    HybridBeamformer bf;
    bf.F_RF = CMat::from_columns(cols);
    bf.F_BB = mmse_digital(bf.F_RF, s);
    return bf;
}

/// Smallest singular value of F_RF after scaling every column to unit norm.
inline double min_singular_value_normalized(const CMat& F) {
    CMat N = F;
    for (std::size_t c = 0; c < N.cols(); ++c) {
        const double n = norm2(N.col_span(c));
        for (auto& x : N.col_span(c))
            x /= n;
    }
    const auto eig = hermitian_eig(HermitianMatrix(adjoint_matmul(N, N)));
    return std::sqrt(std::max(0.0, eig.values.back()));
}

} // namespace kronbf
