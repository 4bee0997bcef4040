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

// Command-line front end: single runs, sweeps, figure presets, self-checks.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error.

#include "kronbf/sim_harness.hpp"
#include "kronbf/verification.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace kronbf;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "key=value configuration file");
    cmd->add_option("--set", a.overrides, "override one key (KEY=VALUE), repeatable");
    cmd->add_option("--seed", a.seed, "master seed");
    cmd->add_option("--trials", a.trials, "number of Monte-Carlo trials");
    cmd->add_option("--threads", a.threads, "worker threads")->check(CLI::PositiveNumber);
}

// Defaults, then the config file, then --set, then the dedicated flags.
Settings resolve(const CommonArgs& a) {
    Settings s;
    if (!a.config_path.empty())
        load_config_file(s, a.config_path);
    for (const auto& o : a.overrides)
        apply_assignment(s, o);
    if (a.seed)
        s.sim.seed = *a.seed;
    if (a.trials)
        s.sim.trials = *a.trials;
    return s;
}

std::string fmt(double x, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, x);
    return buf;
}

int cmd_run(const CommonArgs& a) {
    auto s = resolve(a);
    if (!a.trials)
        s.sim.trials = 1;
    s.sim.validate();
    const auto trials = run_trials(s.sim, s.sim.trials, a.threads);
    std::cout << "config " << fingerprint_hex(canonical_config(s.sim)) << "  seed " << s.sim.seed << "  trials "
              << s.sim.trials << "\n";
    for (const auto& t : trials) {
        std::cout << "trial " << t.trial_index << "\n";
        for (const auto& o : t.outcomes) {
            std::cout << "  " << std::left << std::setw(16) << scheme_name(o.scheme);
            if (!o.ok) {
                std::cout << "infeasible: " << o.error << "\n";
                continue;
            }
            std::cout << "sum_rate " << fmt(o.sum_rate) << " bps/Hz";
            if (!std::isnan(o.max_null_residual))
                std::cout << "  null_residual " << detail::fmt_sci(o.max_null_residual);
            std::cout << "\n";
        }
    }
    if (trials.size() > 1) {
        std::cout << "mean over " << trials.size() << " trials\n";
        for (const auto& row : aggregate(0.0, s.sim, trials)) {
            std::cout << "  " << std::left << std::setw(16) << scheme_name(row.scheme);
            if (row.feasible)
                std::cout << fmt(row.mean_sum_rate) << " +- " << fmt(row.stderr_sum_rate) << "\n";
            else
                std::cout << "infeasible\n";
        }
    }
    return kExitOk;
}

ResultFormat format_for(const std::string& flag, const std::string& path) {
    if (!flag.empty())
        return parse_format(flag);
    return std::filesystem::path(path).extension() == ".json" ? ResultFormat::Json : ResultFormat::Csv;
}

void require_parent_dir(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent))
        throw ConfigError("output directory '" + parent.string() + "' does not exist");
}

int cmd_sweep(const CommonArgs& a, const std::string& out, const std::string& format) {
    const auto s = resolve(a);
    if (!s.axis)
        throw ConfigError("sweep needs an 'axis' key (snr_dB, isr_dB, N_columns or Gamma)");
    SweepSpec spec{*s.axis, s.values, s.sim};
    const auto fmt_kind = format_for(format, out);
    require_parent_dir(out);
    const auto res = run_sweep(spec, a.threads);
    write_results(res, out, fmt_kind);
    std::cout << "wrote " << res.rows.size() << " rows to " << out << " (fingerprint " << res.fingerprint << ")\n";
    return kExitOk;
}

int cmd_figures(const CommonArgs& a, const std::string& which, const std::string& out_dir,
                const std::string& format) {
    const auto s = resolve(a);
    if (!std::filesystem::is_directory(out_dir))
        throw ConfigError("output directory '" + out_dir + "' does not exist");
    const auto fmt_kind = format.empty() ? ResultFormat::Csv : parse_format(format);
    std::vector<std::string> figs{"fig3", "fig4", "fig5", "fig6"};
    if (which != "all")
        figs = {which};
    for (const auto& f : figs) {
        auto spec = figure_sweep(f, s.sim);
        const auto res = run_sweep(spec, a.threads);
        const auto path =
            (std::filesystem::path(out_dir) / (f + (fmt_kind == ResultFormat::Json ? ".json" : ".csv"))).string();
        write_results(res, path, fmt_kind);
        std::cout << f << ": " << res.rows.size() << " rows -> " << path << "\n";
    }
    return kExitOk;
}

int cmd_verify(const CommonArgs& a, const std::string& corrupt, bool theorem1) {
    auto s = resolve(a);
    s.sim.validate();
    BuildOptions opt;
    if (corrupt == "nulling")
        opt.corrupt_nulling = true;
    else if (!corrupt.empty())
        throw ConfigError("unknown fault '" + corrupt + "' (expected nulling)");

    std::vector<SuiteResult> results;
    results.push_back(suite_reconstruction(1000, s.sim.seed));
    results.push_back(suite_permutation(1000, s.sim.seed));
    results.push_back(suite_nulling(s.sim, 100, opt));
    results.push_back(suite_dominance(s.sim, 50));
    if (theorem1) {
        auto t1 = suite_theorem1(1000, s.sim.seed);
        results.push_back(std::move(t1.rank));
        results.push_back(std::move(t1.infeasible));
    }
    bool ok = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(22) << r.name << r.cases
                  << " cases  " << r.detail << "\n";
        ok = ok && r.passed;
    }
    return ok ? kExitOk : kExitVerifyFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kronecker-structured hybrid beamforming simulator"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, fig_args, verify_args;
    std::string out, format, which = "all", fig_out = ".", corrupt;
    bool theorem1 = false;

    auto* run = app.add_subcommand("run", "simulate one trial (or --trials n) and print per-scheme rates");
    add_common(run, run_args);

    auto* sweep = app.add_subcommand("sweep", "run the sweep described by 'axis' and 'values'");
    add_common(sweep, sweep_args);
    sweep->add_option("--out", out, "output file")->required();
    sweep->add_option("--format", format, "csv or json (default: from extension)");

    auto* figures = app.add_subcommand("figures", "preset sweeps fig3..fig6");
    add_common(figures, fig_args);
    figures->add_option("--which", which, "fig3, fig4, fig5, fig6 or all");
    figures->add_option("--out", fig_out, "existing output directory");
    figures->add_option("--format", format, "csv or json");

    auto* verify = app.add_subcommand("verify", "run the invariant suites");
    add_common(verify, verify_args);
    verify->add_option("--corrupt", corrupt, "inject a fault (nulling)");
    verify->add_flag("--theorem1", theorem1, "include the antenna-count rank sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*run)
            return cmd_run(run_args);
        if (*sweep)
            return cmd_sweep(sweep_args, out, format);
        if (*figures)
            return cmd_figures(fig_args, which, fig_out, format);
        if (*verify)
            return cmd_verify(verify_args, corrupt, theorem1);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InfeasibleConfiguration& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
