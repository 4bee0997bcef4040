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

#include "kronbf/channel_model.hpp"

#include <gtest/gtest.h>

using namespace kronbf;

namespace {

ArrayGeometry geom(std::size_t M, std::size_t N, std::size_t Q = 2) {
    ArrayGeometry g;
    g.M = M;
    g.N = N;
    g.Q = Q;
    return g;
}

} // namespace

TEST(UlaSteering, ZeroAngleIsAllOnes) {
    for (std::size_t Q : {1u, 2u, 5u}) {
        const auto a = ula_steering(0.0, geom(2, 2, Q));
        for (auto x : a.entries())
            EXPECT_EQ(x, Complex(1.0, 0.0));
    }
}

TEST(UlaSteering, BroadsideQuarterTurn) {
    const auto a = ula_steering(kPi / 2, geom(2, 2, 2));
    EXPECT_NEAR(std::abs(a[0] - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(a[1] + 1.0), 0.0, 1e-15);
}

TEST(UlaSteering, RandomMatchesFormula) {
    Rng rng(1);
    const auto g = geom(2, 2, 4);
    for (int rep = 0; rep < 20; ++rep) {
        const double phi = uniform(rng, 0.0, kTwoPi);
        const auto a = ula_steering(phi, g);
        for (std::size_t q = 0; q < 4; ++q)
            EXPECT_NEAR(std::abs(a[q] - std::exp(kJ * (kTwoPi * 0.5 * static_cast<double>(q) * std::sin(phi)))), 0.0,
                        1e-13);
    }
}

TEST(UpaSteering, BroadsideIsAllOnes) {
    const auto a = upa_steering(0.0, kPi / 2, geom(8, 16));
    ASSERT_EQ(a.size(), 128u);
    for (auto x : a.entries())
        EXPECT_NEAR(std::abs(x - 1.0), 0.0, 1e-14);
}

TEST(UpaSteering, TwoByTwoHandValue) {
    const auto a = upa_steering(kPi / 2, kPi / 2, geom(2, 2));
    const CVec expect{1.0, 1.0, -1.0, -1.0};
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_NEAR(std::abs(a[i] - expect[i]), 0.0, 1e-15);
}

TEST(UpaSteering, EqualsKronOfRamps) {
    Rng rng(2);
    const auto g = geom(4, 8);
    for (int rep = 0; rep < 20; ++rep) {
        const double phi = uniform(rng, 0.0, kTwoPi), theta = uniform(rng, 0.0, kPi);
        const auto [Phi, Theta] = upa_phase_increments(phi, theta, g);
        EXPECT_EQ(upa_steering(phi, theta, g).entries(), kron(ramp(Phi, 8), ramp(Theta, 4)));
        const auto f = upa_factors(phi, theta, g);
        EXPECT_EQ(f.num_factors(), 5u);
        const auto m = materialize(f);
        for (std::size_t i = 0; i < m.size(); ++i)
            EXPECT_NEAR(std::abs(m[i] - upa_steering(phi, theta, g)[i]), 0.0, 1e-13);
    }
}

TEST(UpaFactors, DropsLengthOneFactors) {
    EXPECT_EQ(upa_factors(0.3, 1.0, geom(1, 4)).lengths(), (std::vector<std::size_t>{2, 2}));
    EXPECT_EQ(upa_factors(0.3, 1.0, geom(3, 1)).lengths(), (std::vector<std::size_t>{3}));
}

TEST(UserChannel, PureLosLimit) {
    Rng rng(3);
    const auto g = geom(4, 4);
    const auto u = gen_user_channel(0, g, std::numeric_limits<double>::infinity(), 2, rng);
    const auto& los = u.paths.front();
    CMat ref = assemble_user_matrix({los}, g);
    EXPECT_LE(fro_norm(u.G - ref), 1e-12);
    EXPECT_NEAR(std::abs(los.alpha), 1.0, 1e-15);
}

TEST(UserChannel, RankAtMostL) {
    Rng rng(4);
    const auto g = geom(4, 4, 4);
    for (std::size_t L : {1u, 2u, 3u}) {
        const auto u = gen_user_channel(0, g, 3.0, L, rng);
        const auto eig = hermitian_eig(HermitianMatrix(adjoint_matmul(u.G, u.G)));
        const double top = eig.values.front();
        std::size_t rank = 0;
        for (double v : eig.values)
            rank += v > 1e-10 * top;
        EXPECT_LE(rank, L);
        EXPECT_EQ(u.paths.size(), L);
        EXPECT_NEAR(norm2(u.v), 1.0, 1e-12);
    }
}

TEST(UserChannel, AnglesInRange) {
    Rng rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        const auto u = gen_user_channel(0, geom(2, 2), 3.0, 3, rng);
        for (const auto& p : u.paths) {
            EXPECT_GE(p.angles.theta_r, 0.0);
            EXPECT_LE(p.angles.theta_r, kPi);
            EXPECT_GE(p.angles.phi_r, 0.0);
            EXPECT_LT(p.angles.phi_r, kTwoPi);
            EXPECT_GE(p.angles.phi_t, 0.0);
            EXPECT_LT(p.angles.phi_t, kTwoPi);
        }
    }
}

TEST(UserChannel, MeanSquaredNormIsMNQ) {
    Rng rng(6);
    const auto g = geom(4, 4, 2);
    double acc = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const double f = fro_norm(gen_user_channel(0, g, std::pow(10.0, 0.5), 2, rng).G);
        acc += f * f;
    }
    EXPECT_NEAR(acc / n / 32.0, 1.0, 0.03);
}

TEST(UserChannel, RejectsZeroPaths) {
    Rng rng(7);
    EXPECT_THROW(gen_user_channel(0, geom(2, 2), 1.0, 0, rng), std::invalid_argument);
}

TEST(InterferenceChannel, SinglePathNorm) {
    Rng rng(8);
    const auto g = geom(8, 16);
    const auto ic = gen_interference_channel(0, g, 1, rng);
    EXPECT_NEAR(norm2(ic.h), std::abs(ic.paths.front().alpha) * std::sqrt(128.0), 1e-12);
}

TEST(InterferenceChannel, MeanSquaredNormIsMN) {
    Rng rng(9);
    const auto g = geom(4, 4);
    double acc = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const double h = norm2(gen_interference_channel(0, g, 3, rng).h);
        acc += h * h;
    }
    EXPECT_NEAR(acc / n / 16.0, 1.0, 0.03);
}

TEST(InterferenceChannel, DeterministicForSeed) {
    const auto g = geom(4, 4);
    Rng a(10), b(10);
    EXPECT_EQ(gen_interference_channel(0, g, 2, a).h, gen_interference_channel(0, g, 2, b).h);
    EXPECT_THROW(gen_interference_channel(0, g, 0, a), std::invalid_argument);
}

TEST(Precoder, RankOneRecoversRightVector) {
    const CVec a{1.0, Complex(0.0, 1.0), -1.0};
    const CVec b{Complex(0.6, 0.0), Complex(0.0, 0.8)};
    CMat G(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t q = 0; q < 2; ++q)
            G(i, q) = a[i] * std::conj(b[q]);
    const auto v = precoder(G);
    EXPECT_NEAR(std::abs(vdot(b, v)), 1.0, 1e-12);
}

TEST(Precoder, TwoByTwoClosedForm) {
    Rng rng(11);
    for (int rep = 0; rep < 100; ++rep) {
        CMat G(6, 2);
        for (auto& x : G.data())
            x = complex_normal(rng);
        const CMat R = adjoint_matmul(G, G);
        const double a = R(0, 0).real(), d = R(1, 1).real();
        const double lmax = 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + std::norm(R(0, 1)));
        const double gv = norm2(matvec(G, precoder(G)));
        EXPECT_NEAR(gv * gv, lmax, 1e-10 * lmax);
    }
}

TEST(Precoder, OrthogonalEqualColumnsPickFirstAxis) {
    CMat G(4, 2);
    G(0, 0) = 1.0;
    G(1, 1) = 1.0;
    const auto v = precoder(G);
    EXPECT_NEAR(std::abs(v[0] - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(v[1]), 0.0, 1e-12);
    EXPECT_THROW(precoder(CMat(4, 2)), std::invalid_argument);
}

TEST(Scenario, ShapesAndOrdering) {
    ScenarioParams p;
    p.gamma_per_interferer = {1, 3};
    Rng rng(12);
    const auto s = gen_scenario(p, rng);
    EXPECT_EQ(s.num_users(), 4u);
    EXPECT_EQ(s.interferers.size(), 2u);
    EXPECT_EQ(s.num_interference_paths(), 4u);
    EXPECT_EQ(s.effective_channels().cols(), 4u);
    EXPECT_EQ(s.interference_matrix().cols(), 2u);

    // User draws come first, so the interference layout does not change them.
    ScenarioParams q = p;
    q.gamma_per_interferer = {2};
    Rng rng2(12);
    const auto s2 = gen_scenario(q, rng2);
    for (std::size_t k = 0; k < 4; ++k)
        EXPECT_EQ(s.users[k].G.data(), s2.users[k].G.data());
}

TEST(Scenario, RejectsBadPowers) {
    ScenarioParams p;
    p.N0 = 0.0;
    Rng rng(13);
    EXPECT_THROW(gen_scenario(p, rng), ConfigError);
    p.N0 = 1.0;
    p.K = 0;
    EXPECT_THROW(gen_scenario(p, rng), ConfigError);
}
