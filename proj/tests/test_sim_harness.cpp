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

#include "kronbf/sim_harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace kronbf;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("kronbf_test_" + name)).string();
}

SimConfig quick(std::size_t trials = 4) {
    SimConfig c;
    c.trials = trials;
    c.seed = 77;
    return c;
}

} // namespace

TEST(SimConfig, TableTwoDefaults) {
    const SimConfig c;
    EXPECT_EQ(c.K, 4u);
    EXPECT_EQ(c.Q, 2u);
    EXPECT_EQ(c.L, 2u);
    EXPECT_EQ(c.M, 8u);
    EXPECT_EQ(c.N, 16u);
    EXPECT_EQ(c.kappa_dB, 5.0);
    EXPECT_EQ(c.cell_radius_m, 100.0);
    EXPECT_EQ(c.bs_height_m, 10.0);
    EXPECT_EQ(c.ue_height_min_m, 1.5);
    EXPECT_EQ(c.ue_height_max_m, 22.5);
    EXPECT_EQ(c.d_h, 0.5);
    EXPECT_EQ(c.d_v, 0.5);
    EXPECT_EQ(c.spread_h_rad, kPi);
    EXPECT_EQ(c.spread_v_rad, kPi / 2);
    EXPECT_EQ(c.trials, 500u);
    const auto p = c.scenario_params();
    EXPECT_NEAR(p.N0, 0.01, 1e-15);
    EXPECT_NEAR(p.P_I, 1.0, 1e-15);
    EXPECT_EQ(p.gamma_per_interferer, (std::vector<std::size_t>{1, 1}));
}

TEST(Settings, UnknownKeyIsNamed) {
    Settings s;
    try {
        apply_assignment(s, "antennas=4");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("'antennas'"), std::string::npos);
    }
}

TEST(Settings, ParsesEveryKind) {
    Settings s;
    apply_assignment(s, "K = 3");
    apply_assignment(s, "Gamma=1, 2");
    apply_assignment(s, "Psi=2");
    apply_assignment(s, "snr_dB=-5.5");
    apply_assignment(s, "schemes=alg3,egc_mmse");
    apply_assignment(s, "axis=isr_dB");
    apply_assignment(s, "values=-10,0,10");
    apply_assignment(s, "seed=18446744073709551615");
    EXPECT_EQ(s.sim.K, 3u);
    EXPECT_EQ(s.sim.gamma_per_interferer(), (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(s.sim.snr_dB, -5.5);
    EXPECT_EQ(s.sim.schemes, (std::vector<Scheme>{Scheme::Alg3, Scheme::EgcMmse}));
    EXPECT_EQ(*s.axis, SweepAxis::IsrDb);
    EXPECT_EQ(s.values, (std::vector<double>{-10, 0, 10}));
    EXPECT_EQ(s.sim.seed, 18446744073709551615ULL);
    EXPECT_THROW(apply_assignment(s, "K=-1"), ConfigError);
    EXPECT_THROW(apply_assignment(s, "snr_dB=loud"), ConfigError);
    EXPECT_THROW(apply_assignment(s, "schemes=bfgs"), ConfigError);
    EXPECT_THROW(apply_assignment(s, "K"), ConfigError);
    s.sim.Gamma = {1, 2, 3};
    EXPECT_THROW(s.sim.validate(), ConfigError);
}

TEST(Settings, ConfigTextWithComments) {
    std::istringstream in("# sweep over ISR\nisr_dB = 10  # strong\n\nN=32\n");
    Settings s;
    load_config_text(s, in);
    EXPECT_EQ(s.sim.isr_dB, 10.0);
    EXPECT_EQ(s.sim.N, 32u);
    std::istringstream bad("K=4\nfoo=1\n");
    try {
        load_config_text(s, bad, "cfg");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("cfg:2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(load_config_file(s, "/nonexistent/kronbf.cfg"), ConfigError);
}

TEST(RunTrial, DeterministicPerSeedAndIndex) {
    const auto c = quick();
    const auto a = run_trial(c, 3), b = run_trial(c, 3);
    ASSERT_EQ(a.outcomes.size(), all_schemes().size());
    for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
        EXPECT_EQ(a.outcomes[i].sum_rate, b.outcomes[i].sum_rate);
        EXPECT_EQ(a.outcomes[i].desired_power, b.outcomes[i].desired_power);
    }
    EXPECT_NE(run_trial(c, 4).outcomes[0].sum_rate, a.outcomes[0].sum_rate);
}

TEST(RunTrial, MmseOnlyNeedsNoKroneckerStructure) {
    auto c = quick();
    c.M = 1;
    c.N = 3; // one factor, cannot null two paths
    c.schemes = {Scheme::Mmse};
    const auto r = run_trial(c, 0);
    ASSERT_TRUE(r.outcomes[0].ok);
    EXPECT_GT(r.outcomes[0].sum_rate, 0.0);
    EXPECT_TRUE(std::isnan(r.outcomes[0].max_null_residual));
}

TEST(RunTrial, InfeasibleSchemeRecordedOthersContinue) {
    auto c = quick();
    c.M = 2;
    c.N = 4; // D = 3 < Gamma + log2 K
    const auto r = run_trial(c, 0);
    EXPECT_TRUE(r.find(Scheme::Mmse)->ok);
    EXPECT_TRUE(r.find(Scheme::EgcMmse)->ok);
    EXPECT_FALSE(r.find(Scheme::Alg3)->ok);
    EXPECT_NE(r.find(Scheme::Alg3)->error.find("infeasible"), std::string::npos);
}

TEST(RunTrial, ExhaustiveDominatesAlg3PerUser) {
    auto c = quick();
    c.schemes = {Scheme::Alg3, Scheme::Exhaustive};
    for (std::size_t t = 0; t < 20; ++t) {
        const auto r = run_trial(c, t);
        const auto& a3 = r.find(Scheme::Alg3)->desired_power;
        const auto& ex = r.find(Scheme::Exhaustive)->desired_power;
        for (std::size_t k = 0; k < a3.size(); ++k)
            EXPECT_GE(ex[k], a3[k] * (1 - 1e-9));
    }
}

TEST(RunTrials, ParallelEqualsSerial) {
    const auto c = quick();
    const auto serial = run_trials(c, 6, 1), parallel = run_trials(c, 6, 3);
    for (std::size_t t = 0; t < 6; ++t)
        for (std::size_t i = 0; i < serial[t].outcomes.size(); ++i)
            EXPECT_EQ(serial[t].outcomes[i].sum_rate, parallel[t].outcomes[i].sum_rate);
}

TEST(SlowFading, CachedAnalogStageIsReused) {
    const auto c = quick();
    const auto r = run_slow_fading_trial(c, 0, 5);
    EXPECT_TRUE(r.analog_stage_reused);
    ASSERT_EQ(r.cached_rates.size(), 5u);
    EXPECT_EQ(r.cached_rates, r.recomputed_rates);
    EXPECT_NE(r.cached_rates[0], r.cached_rates[1]);
}

TEST(MeanStderr, KnownValues) {
    const auto [m, se] = mean_stderr({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(m, 2.5);
    EXPECT_NEAR(se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
    EXPECT_EQ(mean_stderr({7.0}).second, 0.0);
}

TEST(Sweep, SingleTrialRowsEqualRunTrial) {
    SweepSpec spec{SweepAxis::SnrDb, {10.0}, quick(1)};
    const auto res = run_sweep(spec);
    const auto t = run_trial(apply_axis(spec.fixed, SweepAxis::SnrDb, 10.0), 0);
    ASSERT_EQ(res.rows.size(), t.outcomes.size());
    for (std::size_t i = 0; i < t.outcomes.size(); ++i) {
        EXPECT_EQ(res.rows[i].mean_sum_rate, t.outcomes[i].sum_rate);
        EXPECT_EQ(res.rows[i].stderr_sum_rate, 0.0);
        EXPECT_EQ(res.rows[i].trials, 1u);
    }
}

TEST(Sweep, AxisOrderDoesNotMatter) {
    auto c = quick(3);
    c.schemes = {Scheme::Mmse, Scheme::Alg3};
    const auto a = run_sweep({SweepAxis::IsrDb, {-10.0, 0.0, 10.0}, c});
    const auto b = run_sweep({SweepAxis::IsrDb, {10.0, -10.0, 0.0}, c});
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].axis_value, b.rows[i].axis_value);
        EXPECT_EQ(a.rows[i].mean_sum_rate, b.rows[i].mean_sum_rate);
    }
    EXPECT_EQ(a.fingerprint, b.fingerprint);
}

TEST(Sweep, RejectsInvalidSpecs) {
    EXPECT_THROW(run_sweep({SweepAxis::SnrDb, {}, quick()}), ConfigError);
    EXPECT_THROW(run_sweep({SweepAxis::SnrDb, {1.0, 1.0}, quick()}), ConfigError);
    EXPECT_THROW(run_sweep({SweepAxis::Gamma, {1.5}, quick()}), ConfigError);
    SweepSpec ok{SweepAxis::SnrDb, {0.0, 1.0}, quick()};
    EXPECT_NO_THROW(ok.validate());
    EXPECT_THROW((SweepSpec{SweepAxis::SnrDb, {1.0, 0.0}, quick()}.validate()), ConfigError);
}

TEST(Sweep, SnrAxisMonotoneForAlg3) {
    auto c = quick(500);
    c.schemes = {Scheme::Alg3};
    const auto res = run_sweep({SweepAxis::SnrDb, {0, 10, 20, 30, 40}, c});
    const auto s = res.series(Scheme::Alg3);
    for (std::size_t i = 1; i < s.size(); ++i)
        EXPECT_GE(s[i], s[i - 1]);
}

TEST(Sweep, InfeasiblePointsBecomeGaps) {
    auto c = quick(2);
    c.M = 2;
    c.N = 4;
    c.K = 2;
    c.Psi = 1;
    c.schemes = {Scheme::Alg3, Scheme::EgcMmse};
    const auto res = run_sweep({SweepAxis::Gamma, {1, 2, 3}, c});
    EXPECT_TRUE(res.find(1, Scheme::Alg3)->feasible);
    EXPECT_TRUE(res.find(2, Scheme::Alg3)->feasible);
    EXPECT_FALSE(res.find(3, Scheme::Alg3)->feasible);
    EXPECT_TRUE(std::isnan(res.series(Scheme::Alg3)[2]));
    EXPECT_TRUE(res.find(3, Scheme::EgcMmse)->feasible);
    const auto csv = results_csv(res);
    EXPECT_NE(csv.find("Gamma,3,alg3,,,0,77"), std::string::npos) << csv;
}

TEST(Results, CsvRoundTrip) {
    auto c = quick(3);
    c.schemes = {Scheme::Mmse, Scheme::Alg4};
    const auto res = run_sweep({SweepAxis::NColumns, {4, 8}, c});
    const auto path = temp_path("roundtrip.csv");
    write_results(res, path, ResultFormat::Csv);
    const auto back = read_results_csv(path);
    ASSERT_EQ(back.size(), res.rows.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].axis_value, res.rows[i].axis_value);
        EXPECT_EQ(back[i].scheme, res.rows[i].scheme);
        EXPECT_EQ(back[i].mean_sum_rate, res.rows[i].mean_sum_rate);
        EXPECT_EQ(back[i].stderr_sum_rate, res.rows[i].stderr_sum_rate);
        EXPECT_EQ(back[i].trials, res.rows[i].trials);
        EXPECT_GE(back[i].stderr_sum_rate, 0.0);
    }
    std::filesystem::remove(path);
}

TEST(Results, EmptyResultIsHeaderOnly) {
    SweepResult empty;
    EXPECT_EQ(results_csv(empty), std::string(kCsvHeader) + "\n");
}

TEST(Results, JsonMirrorsCsvSchema) {
    auto c = quick(2);
    c.schemes = {Scheme::Mmse};
    const auto res = run_sweep({SweepAxis::SnrDb, {0, 10}, c});
    const auto j = results_json(res);
    ASSERT_TRUE(j.contains("config"));
    ASSERT_EQ(j["rows"].size(), 2u);
    for (const char* key : {"axis_name", "axis_value", "scheme", "mean_sum_rate_bps_hz", "stderr", "trials", "seed"})
        EXPECT_TRUE(j["rows"][0].contains(key)) << key;
    EXPECT_EQ(j["config"]["fingerprint"], res.fingerprint);
    EXPECT_EQ(j["rows"][1]["mean_sum_rate_bps_hz"].get<double>(), res.rows[1].mean_sum_rate);
}

TEST(Results, UnwritablePathNamedInError) {
    SweepResult empty;
    const std::string path = "/nonexistent-dir/out.csv";
    try {
        write_results(empty, path, ResultFormat::Csv);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find(path), std::string::npos);
    }
}

TEST(Fingerprint, StableAndSensitive) {
    const SweepSpec a{SweepAxis::SnrDb, {0, 10}, quick()};
    EXPECT_EQ(sweep_fingerprint(a), sweep_fingerprint(a));
    // Recomputed by hand: FNV-1a of the canonical text.
    std::string text = canonical_config(a.fixed) + "axis=snr_dB\nvalues=0,10\n";
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text)
        h = (h ^ ch) * 1099511628211ULL;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    EXPECT_EQ(sweep_fingerprint(a), buf);
    SweepSpec b = a;
    b.fixed.seed += 1;
    EXPECT_NE(sweep_fingerprint(a), sweep_fingerprint(b));
}

TEST(Figures, PresetsFollowCaptions) {
    const auto f3 = figure_sweep("fig3");
    EXPECT_EQ(f3.axis, SweepAxis::SnrDb);
    EXPECT_EQ(f3.values, (std::vector<double>{0, 5, 10, 15, 20, 25, 30, 35, 40}));
    EXPECT_EQ(f3.fixed.isr_dB, 0.0);
    EXPECT_EQ(f3.fixed.Psi, 2u);
    const auto f5 = figure_sweep("fig5");
    EXPECT_EQ(f5.values, (std::vector<double>{16, 32, 64, 128}));
    EXPECT_EQ(f5.fixed.M, 8u);
    const auto f6 = figure_sweep("fig6");
    EXPECT_EQ(f6.fixed.Psi, 1u);
    EXPECT_EQ(f6.values, (std::vector<double>{1, 2, 3, 4, 5}));
    EXPECT_EQ(figure_sweep("fig4").axis, SweepAxis::IsrDb);
    EXPECT_THROW(figure_sweep("fig7"), ConfigError);
}
