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

// Self-check suites run by `kronbf verify` and the acceptance binary.

#include "kronbf/beamformers.hpp"
#include "kronbf/kron_algebra.hpp"
#include "kronbf/sim_harness.hpp"

#include <cstdio>
#include <random>
#include <string>
#include <vector>

namespace kronbf {

struct SuiteResult {
    std::string name;
    bool passed = true;
    std::size_t cases = 0;
    std::string detail;
};

namespace detail {

inline std::string fmt_sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

inline PhaseVector random_phase_vector(std::size_t n, Rng& rng) {
    CVec v(n);
    for (auto& x : v)
        x = std::polar(1.0, uniform(rng, 0.0, kTwoPi));
    return PhaseVector(std::move(v));
}

inline double max_abs_diff(std::span<const Complex> a, std::span<const Complex> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace detail

/// materialize(primitive_decompose_ramp(θ, n)) against the direct ramp.
inline SuiteResult suite_reconstruction(std::size_t cases, std::uint64_t seed) {
    SuiteResult r{"reconstruction", true, cases, {}};
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> len(1, 256);
    double worst = 0.0;
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t n = len(rng);
        const double theta = uniform(rng, -kTwoPi, kTwoPi);
        const auto chain = primitive_decompose_ramp(theta, n);
        const auto v = materialize(chain);
        if (v.size() != n) {
            r.passed = false;
            r.detail = "length mismatch at n=" + std::to_string(n);
            return r;
        }
        for (auto l : chain.lengths())
            if (n > 1 && prime_factors(l).size() != 1) {
                r.passed = false;
                r.detail = "non-prime factor length " + std::to_string(l);
                return r;
            }
        worst = std::max(worst, detail::max_abs_diff(v, ramp(theta, n)));
    }
    r.passed = worst <= 1e-12;
    r.detail = "max |error| " + detail::fmt_sci(worst);
    return r;
}

/// materialize(chain) = P · materialize(chain with p, q exchanged), and P is
/// orthogonal (Pᵀ undoes it).
inline SuiteResult suite_permutation(std::size_t cases, std::uint64_t seed) {
    SuiteResult r{"permutation", true, cases, {}};
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> nf(2, 5);
    std::uniform_int_distribution<std::size_t> pick_len(0, 2);
    const std::size_t primes[] = {2, 3, 5};
    double worst = 0.0;
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t k = nf(rng);
        std::vector<PhaseVector> factors;
        for (std::size_t d = 0; d < k; ++d)
            factors.push_back(detail::random_phase_vector(primes[pick_len(rng)], rng));
        std::uniform_int_distribution<std::size_t> idx(0, k - 1);
        const std::size_t p = idx(rng);
        std::size_t q = idx(rng);
        if (q == p)
            q = (p + 1) % k;
        const KroneckerChain chain(factors);
        KroneckerChain swapped = chain;
        swapped.swap_factors(p, q);
        const auto lengths = chain.lengths();
        const auto P = swap_permutation(lengths, p, q);
        const auto x = materialize(chain);
        const auto y = materialize(swapped);
        worst = std::max(worst, detail::max_abs_diff(P.apply(y), x));
        worst = std::max(worst, detail::max_abs_diff(P.apply_transpose(x), y));
    }
    r.passed = worst <= 1e-12;
    r.detail = "max |error| " + detail::fmt_sci(worst);
    return r;
}

/// Per-path nulling residual of every Kronecker nulling scheme.
inline SuiteResult suite_nulling(const SimConfig& c, std::size_t scenarios, const BuildOptions& opt = {}) {
    SuiteResult r{"nulling", true, scenarios, {}};
    const auto params = c.scenario_params();
    double worst = 0.0;
    for (std::size_t t = 0; t < scenarios; ++t) {
        auto rng = trial_rng(c.seed, t);
        const auto s = gen_scenario(params, rng);
        for (auto scheme : {Scheme::Exhaustive, Scheme::Alg3, Scheme::Alg4, Scheme::SuccessiveKhb})
            worst = std::max(worst, max_nulling_residual(build_scheme(scheme, s, params.geometry, opt).F_RF, s,
                                                         params.geometry));
    }
    r.passed = worst <= 1e-12;
    r.detail = "max |f_RF^H a_r|/MN " + detail::fmt_sci(worst);
    return r;
}

/// Per-user desired power: exhaustive >= alg3 >= 0 on every draw.
inline SuiteResult suite_dominance(const SimConfig& c, std::size_t scenarios) {
    SuiteResult r{"dominance", true, scenarios, {}};
    const auto params = c.scenario_params();
    std::size_t violations = 0;
    for (std::size_t t = 0; t < scenarios; ++t) {
        auto rng = trial_rng(c.seed, t);
        const auto s = gen_scenario(params, rng);
        const auto ex = evaluate_scheme(Scheme::Exhaustive, s, params.geometry);
        const auto a3 = evaluate_scheme(Scheme::Alg3, s, params.geometry);
        if (!ex.ok || !a3.ok) {
            r.passed = false;
            r.detail = ex.ok ? a3.error : ex.error;
            return r;
        }
        for (std::size_t k = 0; k < s.num_users(); ++k) {
            const double tol = 1e-9 * std::max(1.0, ex.desired_power[k]);
            if (ex.desired_power[k] + tol < a3.desired_power[k] || a3.desired_power[k] < 0.0)
                ++violations;
        }
    }
    r.passed = violations == 0;
    r.detail = std::to_string(violations) + " per-user violations";
    return r;
}

struct Theorem1Report {
    SuiteResult rank;       ///< MN at the bound: F_RF has full column rank
    SuiteResult infeasible; ///< MN below the bound: builder refuses
};

/// K=4, Ψ=1, Γ₁=2 at MN=16 (M=N=4) and MN=8 (M=4, N=2).
inline Theorem1Report suite_theorem1(std::size_t scenarios, std::uint64_t seed, double min_fraction = 0.99) {
    Theorem1Report out;
    SimConfig c;
    c.K = 4;
    c.M = 4;
    c.N = 4;
    c.Psi = 1;
    c.Gamma = {2};
    c.seed = seed;
    auto params = c.scenario_params();
    std::size_t full_rank = 0;
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < scenarios; ++t) {
        auto rng = trial_rng(seed, t);
        const auto s = gen_scenario(params, rng);
        const double sv = min_singular_value_normalized(build_alg3(s, params.geometry).F_RF);
        smallest = std::min(smallest, sv);
        if (sv > 1e-6)
            ++full_rank;
    }
    const double frac = static_cast<double>(full_rank) / static_cast<double>(scenarios);
    out.rank = {"theorem1-rank", frac >= min_fraction, scenarios,
                std::to_string(full_rank) + "/" + std::to_string(scenarios) +
                    " full rank, min sigma " + detail::fmt_sci(smallest)};

    c.N = 2;
    params = c.scenario_params();
    auto rng = trial_rng(seed, 0);
    const auto s = gen_scenario(params, rng);
    out.infeasible = {"theorem1-infeasible", false, 1, "builder accepted MN=8"};
    try {
        build_alg3(s, params.geometry);
    } catch (const InfeasibleConfiguration& e) {
        out.infeasible.passed = true;
        out.infeasible.detail = e.what();
    }
    return out;
}

} // namespace kronbf
