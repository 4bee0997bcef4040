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

// Seeded Monte-Carlo trials and parameter sweeps over the beamforming
// schemes, with flat key=value configuration and CSV/JSON result files.
//
// Every trial draws from its own RNG stream keyed by (seed, trial index), so
// a sweep is a pure function of its configuration regardless of how trials
// are scheduled across threads. The stream does not depend on the swept
// value: all points of a sweep see the same user channels.

#include "kronbf/beamformers.hpp"
#include "kronbf/channel_model.hpp"
#include "kronbf/errors.hpp"
#include "kronbf/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace kronbf {

enum class Scheme { Mmse, Exhaustive, Alg3, Alg4, SuccessiveKhb, EgcMmse };

inline const std::vector<Scheme>& all_schemes() {
    static const std::vector<Scheme> s{Scheme::Mmse,  Scheme::Exhaustive,    Scheme::Alg3,
                                       Scheme::Alg4,  Scheme::SuccessiveKhb, Scheme::EgcMmse};
    return s;
}

inline std::string scheme_name(Scheme s) {
    switch (s) {
    case Scheme::Mmse:
        return "mmse";
    case Scheme::Exhaustive:
        return "exhaustive";
    case Scheme::Alg3:
        return "alg3";
    case Scheme::Alg4:
        return "alg4";
    case Scheme::SuccessiveKhb:
        return "successive_khb";
    case Scheme::EgcMmse:
        return "egc_mmse";
    }
    return "?";
}

inline Scheme parse_scheme(const std::string& name) {
    for (auto s : all_schemes())
        if (scheme_name(s) == name)
            return s;
    throw ConfigError("unknown scheme '" + name + "'");
}

/// Uses the Kronecker nulling machinery.
inline bool is_nulling_scheme(Scheme s) {
    return s == Scheme::Exhaustive || s == Scheme::Alg3 || s == Scheme::Alg4 || s == Scheme::SuccessiveKhb;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct SimConfig {
    std::size_t K = 4;
    std::size_t Q = 2;
    std::size_t L = 2;
    std::size_t M = 8;
    std::size_t N = 16;
    std::size_t Psi = 2;
    std::vector<std::size_t> Gamma{1}; ///< one entry for all interferers, or one per interferer
    double kappa_dB = 5.0;
    double snr_dB = 20.0;
    double isr_dB = 0.0;
    double cell_radius_m = 100.0;
    double bs_height_m = 10.0;
    double ue_height_min_m = 1.5;
    double ue_height_max_m = 22.5;
    double spread_h_rad = kPi;
    double spread_v_rad = kPi / 2;
    double d_h = 0.5;
    double d_v = 0.5;
    double d_t = 0.5;
    std::size_t trials = 500;
    std::uint64_t seed = 1;
    std::vector<Scheme> schemes = all_schemes();

    std::vector<std::size_t> gamma_per_interferer() const {
        if (Gamma.size() == 1)
            return std::vector<std::size_t>(Psi, Gamma.front());
        if (Gamma.size() != Psi)
            throw ConfigError("Gamma lists " + std::to_string(Gamma.size()) + " values for Psi=" +
                              std::to_string(Psi) + " interferers");
        return Gamma;
    }

    ArrayGeometry geometry() const { return {M, N, d_h, d_v, d_t, Q}; }

    void validate() const {
        geometry().validate();
        if (K == 0 || L == 0)
            throw ConfigError("K and L must be at least 1");
        if (Gamma.empty())
            throw ConfigError("Gamma must list at least one value");
        for (auto g : gamma_per_interferer())
            if (g == 0)
                throw ConfigError("every interferer needs at least one path (Gamma >= 1)");
        if (trials == 0)
            throw ConfigError("trials must be at least 1");
        if (!(cell_radius_m > 0.0) || !(ue_height_max_m >= ue_height_min_m))
            throw ConfigError("invalid deployment geometry");
        if (schemes.empty())
            throw ConfigError("no schemes selected");
    }

    ScenarioParams scenario_params() const {
        ScenarioParams p;
        p.geometry = geometry();
        p.deployment = {cell_radius_m, bs_height_m, ue_height_min_m, ue_height_max_m, spread_h_rad, spread_v_rad};
        p.K = K;
        p.L = L;
        p.kappa = db_to_linear(kappa_dB);
        p.gamma_per_interferer = gamma_per_interferer();
        p.P_U = 1.0;
        p.P_I = db_to_linear(isr_dB);
        p.N0 = 1.0 / db_to_linear(snr_dB);
        return p;
    }
};

enum class SweepAxis { SnrDb, IsrDb, NColumns, Gamma };

inline std::string axis_name(SweepAxis a) {
    switch (a) {
    case SweepAxis::SnrDb:
        return "snr_dB";
    case SweepAxis::IsrDb:
        return "isr_dB";
    case SweepAxis::NColumns:
        return "N_columns";
    case SweepAxis::Gamma:
        return "Gamma";
    }
    return "?";
}

inline SweepAxis parse_axis(const std::string& s) {
    for (auto a : {SweepAxis::SnrDb, SweepAxis::IsrDb, SweepAxis::NColumns, SweepAxis::Gamma})
        if (axis_name(a) == s)
            return a;
    throw ConfigError("unknown sweep axis '" + s + "' (expected snr_dB, isr_dB, N_columns or Gamma)");
}

struct SweepSpec {
    SweepAxis axis = SweepAxis::SnrDb;
    std::vector<double> values;
    SimConfig fixed;

    void validate() const {
        if (values.empty())
            throw ConfigError("sweep has no axis values");
        for (std::size_t i = 1; i < values.size(); ++i)
            if (!(values[i] > values[i - 1]))
                throw ConfigError("sweep axis values must be strictly increasing");
        if (axis == SweepAxis::NColumns || axis == SweepAxis::Gamma)
            for (double v : values)
                if (v < 1.0 || v != std::floor(v))
                    throw ConfigError(axis_name(axis) + " values must be positive integers");
        fixed.validate();
    }
};

inline SimConfig apply_axis(SimConfig c, SweepAxis axis, double value) {
    switch (axis) {
    case SweepAxis::SnrDb:
        c.snr_dB = value;
        break;
    case SweepAxis::IsrDb:
        c.isr_dB = value;
        break;
    case SweepAxis::NColumns:
        c.N = static_cast<std::size_t>(value);
        break;
    case SweepAxis::Gamma:
        c.Gamma = {static_cast<std::size_t>(value)};
        break;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Configuration text: one `key = value` per line, `#` comments.

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(d))
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("value of '" + key + "' is not a number: '" + v + "'");
    }
}

template <typename T> T parse_unsigned(const std::string& key, const std::string& v) {
    T out{};
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("value of '" + key + "' is not a nonnegative integer: '" + v + "'");
    return out;
}

inline std::string format_double(double d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Everything a config file or `--set` may specify.
struct Settings {
    SimConfig sim;
    std::optional<SweepAxis> axis;
    std::vector<double> values;
};

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "K",  "Q",        "L",      "M",      "N",          "Psi",           "Gamma",           "kappa_dB",
        "snr_dB", "isr_dB", "cell_radius_m", "bs_height_m", "ue_height_min_m", "ue_height_max_m", "spread_h_rad",
        "spread_v_rad", "d_h", "d_v", "d_t", "trials", "seed", "schemes", "axis", "values"};
    return keys;
}

inline void apply_setting(Settings& s, const std::string& raw_key, const std::string& raw_value) {
    using detail::parse_double;
    using detail::parse_unsigned;
    const std::string key = detail::trim(raw_key);
    const std::string v = detail::trim(raw_value);
    auto& c = s.sim;
    if (key == "K")
        c.K = parse_unsigned<std::size_t>(key, v);
    else if (key == "Q")
        c.Q = parse_unsigned<std::size_t>(key, v);
    else if (key == "L")
        c.L = parse_unsigned<std::size_t>(key, v);
    else if (key == "M")
        c.M = parse_unsigned<std::size_t>(key, v);
    else if (key == "N")
        c.N = parse_unsigned<std::size_t>(key, v);
    else if (key == "Psi")
        c.Psi = parse_unsigned<std::size_t>(key, v);
    else if (key == "Gamma") {
        c.Gamma.clear();
        for (const auto& item : detail::split_list(v))
            c.Gamma.push_back(parse_unsigned<std::size_t>(key, item));
        if (c.Gamma.empty())
            throw ConfigError("Gamma needs at least one value");
    } else if (key == "kappa_dB")
        c.kappa_dB = parse_double(key, v);
    else if (key == "snr_dB")
        c.snr_dB = parse_double(key, v);
    else if (key == "isr_dB")
        c.isr_dB = parse_double(key, v);
    else if (key == "cell_radius_m")
        c.cell_radius_m = parse_double(key, v);
    else if (key == "bs_height_m")
        c.bs_height_m = parse_double(key, v);
    else if (key == "ue_height_min_m")
        c.ue_height_min_m = parse_double(key, v);
    else if (key == "ue_height_max_m")
        c.ue_height_max_m = parse_double(key, v);
    else if (key == "spread_h_rad")
        c.spread_h_rad = parse_double(key, v);
    else if (key == "spread_v_rad")
        c.spread_v_rad = parse_double(key, v);
    else if (key == "d_h")
        c.d_h = parse_double(key, v);
    else if (key == "d_v")
        c.d_v = parse_double(key, v);
    else if (key == "d_t")
        c.d_t = parse_double(key, v);
    else if (key == "trials")
        c.trials = parse_unsigned<std::size_t>(key, v);
    else if (key == "seed")
        c.seed = parse_unsigned<std::uint64_t>(key, v);
    else if (key == "schemes") {
        c.schemes.clear();
        for (const auto& item : detail::split_list(v))
            c.schemes.push_back(parse_scheme(item));
    } else if (key == "axis")
        s.axis = parse_axis(v);
    else if (key == "values") {
        s.values.clear();
        for (const auto& item : detail::split_list(v))
            s.values.push_back(parse_double(key, item));
    } else
        throw ConfigError("unknown configuration key '" + key + "'");
}

/// Parses `KEY=VALUE`.
inline void apply_assignment(Settings& s, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("expected KEY=VALUE, got '" + assignment + "'");
    apply_setting(s, assignment.substr(0, eq), assignment.substr(eq + 1));
}

inline void load_config_text(Settings& s, std::istream& in, const std::string& origin = "<config>") {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        try {
            apply_assignment(s, line);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline void load_config_file(Settings& s, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    load_config_text(s, in, path);
}

/// Sorted key=value lines; the basis of the fingerprint.
inline std::string canonical_config(const SimConfig& c) {
    using detail::format_double;
    std::map<std::string, std::string> kv;
    auto list = [](const auto& xs, auto fmt) {
        std::string out;
        for (std::size_t i = 0; i < xs.size(); ++i)
            out += (i ? "," : "") + fmt(xs[i]);
        return out;
    };
    kv["K"] = std::to_string(c.K);
    kv["Q"] = std::to_string(c.Q);
    kv["L"] = std::to_string(c.L);
    kv["M"] = std::to_string(c.M);
    kv["N"] = std::to_string(c.N);
    kv["Psi"] = std::to_string(c.Psi);
    kv["Gamma"] = list(c.Gamma, [](std::size_t g) { return std::to_string(g); });
    kv["kappa_dB"] = format_double(c.kappa_dB);
    kv["snr_dB"] = format_double(c.snr_dB);
    kv["isr_dB"] = format_double(c.isr_dB);
    kv["cell_radius_m"] = format_double(c.cell_radius_m);
    kv["bs_height_m"] = format_double(c.bs_height_m);
    kv["ue_height_min_m"] = format_double(c.ue_height_min_m);
    kv["ue_height_max_m"] = format_double(c.ue_height_max_m);
    kv["spread_h_rad"] = format_double(c.spread_h_rad);
    kv["spread_v_rad"] = format_double(c.spread_v_rad);
    kv["d_h"] = format_double(c.d_h);
    kv["d_v"] = format_double(c.d_v);
    kv["d_t"] = format_double(c.d_t);
    kv["trials"] = std::to_string(c.trials);
    kv["seed"] = std::to_string(c.seed);
    kv["schemes"] = list(c.schemes, [](Scheme s) { return scheme_name(s); });
    std::string out;
    for (const auto& [k, v] : kv)
        out += k + "=" + v + "\n";
    return out;
}

inline std::string fingerprint_hex(const std::string& canonical) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a(canonical)));
    return buf;
}

inline std::string sweep_fingerprint(const SweepSpec& spec) {
    std::string text = canonical_config(spec.fixed) + "axis=" + axis_name(spec.axis) + "\nvalues=";
    for (std::size_t i = 0; i < spec.values.size(); ++i)
        text += (i ? "," : "") + detail::format_double(spec.values[i]);
    return fingerprint_hex(text + "\n");
}

// ---------------------------------------------------------------------------
// Trials

/// Independent stream for one trial.
inline Rng trial_rng(std::uint64_t seed, std::size_t trial_index) {
    const std::uint64_t s = detail::splitmix64(seed ^ detail::splitmix64(0xA5A5A5A5ULL + trial_index));
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(trial_index), static_cast<std::uint32_t>(trial_index >> 32)};
    return Rng(seq);
}

struct SchemeOutcome {
    Scheme scheme = Scheme::Mmse;
    bool ok = false;
    std::string error;
    double sum_rate = std::numeric_limits<double>::quiet_NaN();
    /// max over k, ψ, γ of |f_RF(k)ᴴ a_r(ψγ)| / MN; NaN without an analog stage.
    double max_null_residual = std::numeric_limits<double>::quiet_NaN();
    /// |f_RF(k)ᴴ G_k v_k|² per user; empty without an analog stage.
    std::vector<double> desired_power;
};

struct TrialResult {
    std::size_t trial_index = 0;
    std::vector<SchemeOutcome> outcomes;

    const SchemeOutcome* find(Scheme s) const {
        for (const auto& o : outcomes)
            if (o.scheme == s)
                return &o;
        return nullptr;
    }
};

/// Largest per-path nulling residual |f_RF(k)ᴴ a_r| / MN over every user and
/// interference path.
inline double max_nulling_residual(const CMat& F_RF, const Scenario& s, const ArrayGeometry& g) {
    double worst = 0.0;
    const double mn = static_cast<double>(g.antennas());
    for (const auto& ic : s.interferers)
        for (const auto& p : ic.paths) {
            const auto ar = upa_steering(p.angles.phi_r, p.angles.theta_r, g);
            for (std::size_t k = 0; k < F_RF.cols(); ++k)
                worst = std::max(worst, std::abs(vdot(F_RF.col_span(k), ar.span())) / mn);
        }
    return worst;
}

inline HybridBeamformer build_scheme(Scheme scheme, const Scenario& s, const ArrayGeometry& g,
                                     const BuildOptions& opt = {}) {
    switch (scheme) {
    case Scheme::Exhaustive:
        return baseline_exhaustive(s, g, opt);
    case Scheme::Alg3:
        return build_alg3(s, g, opt);
    case Scheme::Alg4:
        return build_alg4(s, g, nullptr, true, opt);
    case Scheme::SuccessiveKhb:
        return baseline_successive_khb(s, g, opt);
    case Scheme::EgcMmse:
        return baseline_egc(s);
    case Scheme::Mmse:
        break;
    }
    throw std::invalid_argument("build_scheme: " + scheme_name(scheme) + " has no hybrid beamformer");
}

inline SchemeOutcome evaluate_scheme(Scheme scheme, const Scenario& s, const ArrayGeometry& g,
                                     const BuildOptions& opt = {}) {
    SchemeOutcome o;
    o.scheme = scheme;
    try {
        if (scheme == Scheme::Mmse) {
            o.sum_rate = sum_rate(mmse_full_digital(s), s);
        } else {
            const auto bf = build_scheme(scheme, s, g, opt);
            o.sum_rate = sum_rate(bf, s);
            o.max_null_residual = max_nulling_residual(bf.F_RF, s, g);
            for (std::size_t k = 0; k < s.num_users(); ++k)
                o.desired_power.push_back(std::norm(vdot(bf.F_RF.col_span(k), s.users[k].effective())));
        }
        o.ok = true;
    } catch (const InfeasibleConfiguration& e) {
        o.error = e.what();
    }
    return o;
}

/// One channel realization evaluated under every configured scheme.
/// Infeasible schemes are recorded and the remaining ones still run.
inline TrialResult run_trial(const SimConfig& c, std::size_t trial_index, const BuildOptions& opt = {}) {
    auto rng = trial_rng(c.seed, trial_index);
    const auto params = c.scenario_params();
    const auto scenario = gen_scenario(params, rng);
    TrialResult r;
    r.trial_index = trial_index;
    for (auto scheme : c.schemes)
        r.outcomes.push_back(evaluate_scheme(scheme, scenario, params.geometry, opt));
    return r;
}

struct SlowFadingResult {
    std::vector<double> cached_rates;     ///< Alg4 with the analog stage reused across frames
    std::vector<double> recomputed_rates; ///< Alg4 rebuilt every frame
    bool analog_stage_reused = true;      ///< cached F_RF identical to the first frame's in every frame
};

/// Keeps every angle fixed and redraws only the NLoS gains over `frames`
/// frames, so Alg4's analog stage may be reused after the first frame.
inline SlowFadingResult run_slow_fading_trial(const SimConfig& c, std::size_t trial_index, std::size_t frames) {
    auto rng = trial_rng(c.seed, trial_index);
    const auto params = c.scenario_params();
    auto scenario = gen_scenario(params, rng);
    const auto& g = params.geometry;
    SlowFadingResult out;
    const auto first = build_alg4(scenario, g);
    const auto cache = first.columns;
    for (std::size_t f = 0; f < frames; ++f) {
        if (f > 0)
            for (auto& u : scenario.users)
                redraw_nlos_gains(u, g, params.kappa, rng);
        const auto reused = build_alg4(scenario, g, &cache, false);
        const auto fresh = build_alg4(scenario, g, &cache, true);
        out.analog_stage_reused = out.analog_stage_reused && reused.F_RF.data() == first.F_RF.data();
        out.cached_rates.push_back(sum_rate(reused, scenario));
        out.recomputed_rates.push_back(sum_rate(fresh, scenario));
    }
    return out;
}

/// Runs `n` trials with `threads` workers; results are stored by index.
inline std::vector<TrialResult> run_trials(const SimConfig& c, std::size_t n, unsigned threads = 1,
                                           const BuildOptions& opt = {}) {
    std::vector<TrialResult> out(n);
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t t = 0; t < n; ++t)
            out[t] = run_trial(c, t, opt);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t t = next++; t < n && !failed; t = next++) {
                try {
                    out[t] = run_trial(c, t, opt);
                } catch (...) {
                    if (!failed.exchange(true))
                        failure = std::current_exception();
                }
            }
        });
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

struct SweepRow {
    double axis_value = 0.0;
    Scheme scheme = Scheme::Mmse;
    bool feasible = true;
    double mean_sum_rate = std::numeric_limits<double>::quiet_NaN();
    double stderr_sum_rate = std::numeric_limits<double>::quiet_NaN();
    std::size_t trials = 0;
    std::string error;
};

struct SweepResult {
    std::string axis_name;
    std::vector<double> axis_values;
    std::vector<SweepRow> rows;
    std::uint64_t seed = 0;
    std::string fingerprint;
    SimConfig config;

    const SweepRow* find(double axis_value, Scheme s) const {
        for (const auto& r : rows)
            if (r.axis_value == axis_value && r.scheme == s)
                return &r;
        return nullptr;
    }

    /// Mean sum rate per axis value for one scheme (NaN where infeasible).
    std::vector<double> series(Scheme s) const {
        std::vector<double> out;
        for (double v : axis_values) {
            const auto* r = find(v, s);
            out.push_back(r ? r->mean_sum_rate : std::numeric_limits<double>::quiet_NaN());
        }
        return out;
    }
};

/// Mean and standard error; accumulation follows trial index order.
inline std::pair<double, double> mean_stderr(const std::vector<double>& xs) {
    if (xs.empty())
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    double mean = 0.0;
    for (double x : xs)
        mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2)
        return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs)
        ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(xs.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

inline std::vector<SweepRow> aggregate(double axis_value, const SimConfig& c, const std::vector<TrialResult>& trials) {
    std::vector<SweepRow> rows;
    for (auto scheme : c.schemes) {
        SweepRow row;
        row.axis_value = axis_value;
        row.scheme = scheme;
        std::vector<double> rates;
        for (const auto& t : trials) {
            const auto* o = t.find(scheme);
            if (o == nullptr || !o->ok) {
                row.feasible = false;
                if (o != nullptr && row.error.empty())
                    row.error = o->error;
                continue;
            }
            rates.push_back(o->sum_rate);
        }
        if (row.feasible) {
            std::tie(row.mean_sum_rate, row.stderr_sum_rate) = mean_stderr(rates);
            row.trials = rates.size();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Axis values are sorted first, so their order in the spec does not matter.
inline SweepResult run_sweep(SweepSpec spec, unsigned threads = 1) {
    std::sort(spec.values.begin(), spec.values.end());
    spec.validate();
    SweepResult res;
    res.axis_name = axis_name(spec.axis);
    res.axis_values = spec.values;
    res.seed = spec.fixed.seed;
    res.fingerprint = sweep_fingerprint(spec);
    res.config = spec.fixed;
    for (double v : spec.values) {
        const auto cfg = apply_axis(spec.fixed, spec.axis, v);
        cfg.validate();
        const auto trials = run_trials(cfg, cfg.trials, threads);
        auto rows = aggregate(v, cfg, trials);
        res.rows.insert(res.rows.end(), rows.begin(), rows.end());
    }
    return res;
}

// ---------------------------------------------------------------------------
// Result files

enum class ResultFormat { Csv, Json };

inline ResultFormat parse_format(const std::string& s) {
    if (s == "csv")
        return ResultFormat::Csv;
    if (s == "json")
        return ResultFormat::Json;
    throw ConfigError("unknown output format '" + s + "' (expected csv or json)");
}

inline constexpr const char* kCsvHeader = "axis_name,axis_value,scheme,mean_sum_rate_bps_hz,stderr,trials,seed";

inline std::string results_csv(const SweepResult& r) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& row : r.rows) {
        out += r.axis_name + "," + detail::format_double(row.axis_value) + "," + scheme_name(row.scheme) + ",";
        if (row.feasible)
            out += detail::format_double(row.mean_sum_rate) + "," + detail::format_double(row.stderr_sum_rate);
        else
            out += ",";
        out += "," + std::to_string(row.trials) + "," + std::to_string(r.seed) + "\n";
    }
    return out;
}

inline nlohmann::json results_json(const SweepResult& r) {
    using nlohmann::json;
    json cfg = json::object();
    std::stringstream ss(canonical_config(r.config));
    std::string line;
    while (std::getline(ss, line))
        if (const auto eq = line.find('='); eq != std::string::npos)
            cfg[line.substr(0, eq)] = line.substr(eq + 1);
    cfg["fingerprint"] = r.fingerprint;
    cfg["axis"] = r.axis_name;
    cfg["values"] = r.axis_values;
    json rows = json::array();
    for (const auto& row : r.rows) {
        json j;
        j["axis_name"] = r.axis_name;
        j["axis_value"] = row.axis_value;
        j["scheme"] = scheme_name(row.scheme);
        j["mean_sum_rate_bps_hz"] = row.feasible ? json(row.mean_sum_rate) : json(nullptr);
        j["stderr"] = row.feasible ? json(row.stderr_sum_rate) : json(nullptr);
        j["trials"] = row.trials;
        j["seed"] = r.seed;
        if (!row.feasible)
            j["error"] = row.error;
        rows.push_back(std::move(j));
    }
    return json{{"config", cfg}, {"rows", rows}};
}

inline void write_results(const SweepResult& r, const std::string& path, ResultFormat fmt) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write results to '" + path + "'");
    if (fmt == ResultFormat::Csv)
        out << results_csv(r);
    else
        out << results_json(r).dump(2) << "\n";
    if (!out)
        throw std::runtime_error("error while writing results to '" + path + "'");
}

/// Rows of a CSV written by write_results (infeasible rows come back with
/// feasible = false).
inline std::vector<SweepRow> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read results from '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error("'" + path + "' does not start with the results header");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            f.push_back(cell);
        if (f.size() == 6)
            f.emplace_back();
        if (f.size() != 7)
            throw std::runtime_error("malformed results row: " + line);
        SweepRow row;
        row.axis_value = std::stod(f[1]);
        row.scheme = parse_scheme(f[2]);
        row.feasible = !f[3].empty();
        if (row.feasible) {
            row.mean_sum_rate = std::stod(f[3]);
            row.stderr_sum_rate = std::stod(f[4]);
        }
        row.trials = std::stoul(f[5]);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Figure presets (Table II defaults plus the per-figure captions).

inline SweepSpec figure_sweep(const std::string& which, const SimConfig& base = {}) {
    SweepSpec s;
    s.fixed = base;
    s.fixed.snr_dB = 20.0;
    s.fixed.isr_dB = 0.0;
    s.fixed.Psi = 2;
    s.fixed.Gamma = {1};
    s.fixed.M = 8;
    s.fixed.N = 16;
    if (which == "fig3") {
        s.axis = SweepAxis::SnrDb;
        s.values = {0, 5, 10, 15, 20, 25, 30, 35, 40};
    } else if (which == "fig4") {
        s.axis = SweepAxis::IsrDb;
        s.values = {-10, 0, 10, 20};
    } else if (which == "fig5") {
        s.axis = SweepAxis::NColumns;
        s.values = {16, 32, 64, 128};
    } else if (which == "fig6") {
        s.axis = SweepAxis::Gamma;
        s.fixed.Psi = 1;
        s.values = {1, 2, 3, 4, 5};
    } else {
        throw ConfigError("unknown figure '" + which + "' (expected fig3, fig4, fig5 or fig6)");
    }
    return s;
}

} // namespace kronbf
