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

// Uplink mmWave channels for an M×N UPA base station: Rician
// Saleh-Valenzuela user channels with Q-element ULA terminals, multi-path
// point-source interferers, and dominant-right-singular-vector precoders.
//
// Angles: phi_r is the horizontal AoA, theta_r the vertical AoA measured from
// the array's vertical axis (zenith angle, [0, π]), phi_t the AoD at the UE.
// All spacings are in wavelengths.

#include "kronbf/errors.hpp"
#include "kronbf/kron_algebra.hpp"
#include "kronbf/linalg.hpp"
#include "kronbf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace kronbf {

using Rng = std::mt19937_64;

struct ArrayGeometry {
    std::size_t M = 8;  ///< rows (vertical element count)
    std::size_t N = 16; ///< columns (horizontal element count)
    double d_h = 0.5;
    double d_v = 0.5;
    double d_t = 0.5;
    std::size_t Q = 2; ///< UE antennas

    std::size_t antennas() const { return M * N; }

    void validate() const {
        if (M == 0 || N == 0 || Q == 0)
            throw ConfigError("ArrayGeometry: M, N and Q must be at least 1");
        if (!(d_h > 0.0) || !(d_v > 0.0) || !(d_t > 0.0))
            throw ConfigError("ArrayGeometry: element spacings must be positive");
    }
};

struct PathAngles {
    double phi_r = 0.0;
    double theta_r = kPi / 2;
    double phi_t = 0.0;
};

struct Path {
    Complex alpha;
    PathAngles angles;
};

struct UserChannel {
    CMat G;                  ///< MN × Q
    std::vector<Path> paths; ///< path 0 is LoS
    CVec v;                  ///< unit-norm precoder, Q × 1

    /// G v, the effective single-stream channel.
    CVec effective() const { return matvec(G, v); }
};

struct InterferenceChannel {
    CVec h; ///< MN × 1
    std::vector<Path> paths;
};

struct Scenario {
    std::vector<UserChannel> users;
    std::vector<InterferenceChannel> interferers;
    double P_U = 1.0;
    double P_I = 1.0;
    double N0 = 1.0;

    std::size_t num_users() const { return users.size(); }
    /// Total number of interference paths Γ = Σ_ψ Γ_ψ.
    std::size_t num_interference_paths() const {
        std::size_t g = 0;
        for (const auto& i : interferers)
            g += i.paths.size();
        return g;
    }

    /// MN × K matrix with columns G_k v_k.
    CMat effective_channels() const {
        std::vector<CVec> cols;
        cols.reserve(users.size());
        for (const auto& u : users)
            cols.push_back(u.effective());
        return CMat::from_columns(cols);
    }

    /// MN × Ψ matrix with columns h_ψ.
    CMat interference_matrix() const {
        std::vector<CVec> cols;
        cols.reserve(interferers.size());
        for (const auto& i : interferers)
            cols.push_back(i.h);
        return CMat::from_columns(cols);
    }
};

/// Where UEs are dropped and how NLoS paths scatter around the LoS direction.
struct DeploymentConfig {
    double cell_radius_m = 100.0;
    double bs_height_m = 10.0;
    double ue_height_min_m = 1.5;
    double ue_height_max_m = 22.5;
    double spread_h_rad = kPi;     ///< full horizontal angular spread of NLoS paths
    double spread_v_rad = kPi / 2; ///< full vertical angular spread of NLoS paths
};

inline double wrap_two_pi(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0)
        w += kTwoPi;
    return w >= kTwoPi ? 0.0 : w;
}

inline Complex complex_normal(Rng& rng) {
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline PhaseVector ula_steering(double phi_t, const ArrayGeometry& g) {
    return PhaseVector(ramp(kTwoPi * g.d_t * std::sin(phi_t), g.Q));
}

/// Horizontal and vertical phase increments (Φ_r, Θ_r) of a UPA steering vector.
inline std::pair<double, double> upa_phase_increments(double phi_r, double theta_r, const ArrayGeometry& g) {
    return {kTwoPi * g.d_h * std::sin(theta_r) * std::sin(phi_r), kTwoPi * g.d_v * std::cos(theta_r)};
}

/// a_h(Φ_r) ⊗ a_v(Θ_r), length MN.
inline PhaseVector upa_steering(double phi_r, double theta_r, const ArrayGeometry& g) {
    const auto [Phi, Theta] = upa_phase_increments(phi_r, theta_r, g);
    return PhaseVector(kron(ramp(Phi, g.N), ramp(Theta, g.M)));
}

/// Primitive Kronecker factors of a UPA steering vector: the horizontal
/// ramp's factors followed by the vertical ramp's. Length-one factors (M or N
/// equal to 1) are dropped.
inline KroneckerChain upa_factors(double phi_r, double theta_r, const ArrayGeometry& g) {
    const auto [Phi, Theta] = upa_phase_increments(phi_r, theta_r, g);
    std::vector<PhaseVector> f;
    for (const auto& chain : {primitive_decompose_ramp(Phi, g.N), primitive_decompose_ramp(Theta, g.M)})
        for (const auto& x : chain.factors())
            if (x.size() > 1)
                f.push_back(x);
    return KroneckerChain(std::move(f));
}

inline KroneckerChain upa_factors(const PathAngles& a, const ArrayGeometry& g) {
    return upa_factors(a.phi_r, a.theta_r, g);
}

/// Dominant right singular vector of G (unit norm); ties resolved as in
/// top_eigpair.
inline CVec precoder(const CMat& G) {
    if (fro_norm(G) == 0.0)
        throw std::invalid_argument("precoder: channel matrix is all zero");
    return top_eigpair(HermitianMatrix(adjoint_matmul(G, G))).vector;
}

/// Σ_l α_l a_r(l) a_tᴴ(l).
inline CMat assemble_user_matrix(const std::vector<Path>& paths, const ArrayGeometry& g) {
    CMat G(g.antennas(), g.Q);
    for (const auto& p : paths) {
        const auto ar = upa_steering(p.angles.phi_r, p.angles.theta_r, g);
        const auto at = ula_steering(p.angles.phi_t, g);
        for (std::size_t q = 0; q < g.Q; ++q) {
            const Complex w = p.alpha * std::conj(at[q]);
            for (std::size_t i = 0; i < g.antennas(); ++i)
                G(i, q) += w * ar[i];
        }
    }
    return G;
}

/// LoS angles of a UE dropped uniformly over the cell disc.
inline PathAngles draw_los_angles(const DeploymentConfig& dep, Rng& rng) {
    const double r = dep.cell_radius_m * std::sqrt(uniform(rng, 0.0, 1.0));
    const double bearing = uniform(rng, 0.0, kTwoPi);
    const double h_ue = uniform(rng, dep.ue_height_min_m, dep.ue_height_max_m);
    PathAngles a;
    a.phi_r = wrap_two_pi(bearing);
    a.theta_r = std::atan2(r, h_ue - dep.bs_height_m);
    a.phi_t = wrap_two_pi(bearing + kPi);
    return a;
}

inline PathAngles draw_nlos_angles(const PathAngles& los, const DeploymentConfig& dep, Rng& rng) {
    const double hh = 0.5 * dep.spread_h_rad;
    const double hv = 0.5 * dep.spread_v_rad;
    PathAngles a;
    a.phi_r = wrap_two_pi(los.phi_r + uniform(rng, -hh, hh));
    a.theta_r = std::clamp(los.theta_r + uniform(rng, -hv, hv), 0.0, kPi);
    a.phi_t = wrap_two_pi(los.phi_t + uniform(rng, -hh, hh));
    return a;
}

inline double los_gain_magnitude(double kappa) {
    return std::isinf(kappa) ? 1.0 : std::sqrt(kappa / (1.0 + kappa));
}

inline double nlos_gain_scale(double kappa, std::size_t L) {
    return std::isinf(kappa) ? 0.0 : std::sqrt(1.0 / ((1.0 + kappa) * static_cast<double>(L - 1)));
}

/// One Rician user channel with L paths (path 0 LoS). `kappa` is linear.
inline UserChannel gen_user_channel(std::size_t /*k*/, const ArrayGeometry& g, double kappa, std::size_t L,
                                    Rng& rng, const DeploymentConfig& dep = {}) {
    if (L == 0)
        throw std::invalid_argument("gen_user_channel: at least one path (LoS) is required");
    if (!(kappa >= 0.0))
        throw std::invalid_argument("gen_user_channel: Rician factor must be nonnegative");
    UserChannel u;
    u.paths.reserve(L);
    const auto los = draw_los_angles(dep, rng);
    u.paths.push_back({std::polar(los_gain_magnitude(kappa), uniform(rng, 0.0, kTwoPi)), los});
    for (std::size_t l = 1; l < L; ++l) {
        const auto ang = draw_nlos_angles(los, dep, rng);
        u.paths.push_back({nlos_gain_scale(kappa, L) * complex_normal(rng), ang});
    }
    u.G = assemble_user_matrix(u.paths, g);
    u.v = precoder(u.G);
    return u;
}

/// Redraws the NLoS gains of an existing channel while keeping every angle;
/// G and v are rebuilt.
inline void redraw_nlos_gains(UserChannel& u, const ArrayGeometry& g, double kappa, Rng& rng) {
    const std::size_t L = u.paths.size();
    for (std::size_t l = 1; l < L; ++l)
        u.paths[l].alpha = nlos_gain_scale(kappa, L) * complex_normal(rng);
    u.G = assemble_user_matrix(u.paths, g);
    u.v = precoder(u.G);
}

/// Multi-path interferer with Γ_ψ equal-variance paths.
inline InterferenceChannel gen_interference_channel(std::size_t /*psi*/, const ArrayGeometry& g,
                                                    std::size_t gamma_paths, Rng& rng) {
    if (gamma_paths == 0)
        throw std::invalid_argument("gen_interference_channel: at least one path is required");
    InterferenceChannel ic;
    ic.h.assign(g.antennas(), Complex{});
    const double scale = 1.0 / std::sqrt(static_cast<double>(gamma_paths));
    for (std::size_t gam = 0; gam < gamma_paths; ++gam) {
        PathAngles a;
        a.phi_r = uniform(rng, 0.0, kTwoPi);
        // Vertical AoA drawn on [0, 2π) and folded into the physical [0, π].
        a.theta_r = kPi - std::fmod(uniform(rng, 0.0, kTwoPi), kPi);
        a.phi_t = 0.0;
        const Complex alpha = scale * complex_normal(rng);
        const auto ar = upa_steering(a.phi_r, a.theta_r, g);
        for (std::size_t i = 0; i < g.antennas(); ++i)
            ic.h[i] += alpha * ar[i];
        ic.paths.push_back({alpha, a});
    }
    return ic;
}

struct ScenarioParams {
    ArrayGeometry geometry;
    DeploymentConfig deployment;
    std::size_t K = 4;
    std::size_t L = 2;
    double kappa = std::pow(10.0, 0.5); ///< linear (5 dB)
    std::vector<std::size_t> gamma_per_interferer{1, 1};
    double P_U = 1.0;
    double P_I = 1.0;
    double N0 = 0.01;
};

/// Users are drawn first, then interferers, so that changing only the
/// interference layout leaves the user channels of a given stream unchanged.
inline Scenario gen_scenario(const ScenarioParams& p, Rng& rng) {
    p.geometry.validate();
    if (p.K == 0)
        throw ConfigError("gen_scenario: K must be at least 1");
    if (!(p.P_U > 0.0) || !(p.P_I > 0.0) || !(p.N0 > 0.0))
        throw ConfigError("gen_scenario: powers must be positive");
    Scenario s;
    s.P_U = p.P_U;
    s.P_I = p.P_I;
    s.N0 = p.N0;
    for (std::size_t k = 0; k < p.K; ++k)
        s.users.push_back(gen_user_channel(k, p.geometry, p.kappa, p.L, rng, p.deployment));
    for (std::size_t psi = 0; psi < p.gamma_per_interferer.size(); ++psi)
        s.interferers.push_back(gen_interference_channel(psi, p.geometry, p.gamma_per_interferer[psi], rng));
    return s;
}

} // namespace kronbf
