// Command-line runner: `run`, `allocate`, `validate`.
//
// Exit codes: 0 success, 2 configuration error (bad flag, key or value),
// 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mscv/errors.hpp"
#include "mscv/experiments.hpp"
#include "mscv/invariants.hpp"
#include "mscv/io.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

struct RunFlags {
    std::optional<int> test;
    std::string config;
    std::optional<std::string> eps, samples, cv, lambda, me, seed, scale;
    std::vector<std::string> set;
    std::string out;
};

mscv::KeyValues resolve(const RunFlags& f) {
    mscv::KeyValues kv;
    if (!f.config.empty()) kv = mscv::read_key_values(f.config);
    // flags after the file, so they win
    auto add = [&](const char* key, const std::optional<std::string>& v) {
        if (v) kv.emplace_back(key, *v);
    };
    if (f.test) kv.emplace_back("test", std::to_string(*f.test));
    add("scale", f.scale);
    add("eps", f.eps);
    add("samples", f.samples);
    add("cv", f.cv);
    add("lambda", f.lambda);
    add("fine_samples", f.me);
    add("seed", f.seed);
    for (const std::string& s : f.set) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw mscv::ParameterError("--set expects key=value, got '" + s + "'");
        kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return kv;
}

void print_progress(const mscv::ExperimentResult& r) {
    std::map<std::pair<double, std::string>, double> l1;
    for (const auto& e : r.errors)
        if (e.norm == "L1") l1[{e.time, e.estimator}] = e.error;
    for (double t : r.times) {
        std::printf("t=%-10.5g", t);
        for (const auto& s : r.estimators) {
            const auto it = l1.find({t, s.label});
            if (it != l1.end()) std::printf("  %s L1=%.3e", s.label.c_str(), it->second);
        }
        std::printf("\n");
    }
}

int do_run(const RunFlags& flags) {
    const mscv::ExperimentConfig cfg = mscv::config_from_pairs(resolve(flags));
    const std::string out = flags.out.empty() ? "mscv_out/test" + std::to_string(cfg.test_id) : flags.out;
    std::printf("test %d (%s), model %s, M=%zu, seed %llu\n", cfg.test_id, cfg.scale == mscv::Scale::paper ? "paper" : "desk",
                mscv::model_label(cfg).c_str(), cfg.samples, static_cast<unsigned long long>(cfg.seed));
    std::fflush(stdout);
    const mscv::ExperimentResult r = mscv::run_experiment(cfg);
    print_progress(r);
    mscv::write_outputs(out, r);
    std::printf("wrote %s (%.1f s)\n", out.c_str(), r.wall_seconds);
    return 0;
}

int do_allocate(const std::string& path) {
    const mscv::CostConfig c = mscv::cost_config_from_pairs(mscv::read_key_values(path));
    const mscv::Allocation a = mscv::allocate_samples(c.cost, c.M);
    std::printf("M=%zu\nM_E1=%zu\nM_E2=%zu\n", c.M, a.m_bgk, a.m_euler);
    return 0;
}

int do_validate() {
    int failed = 0;
    for (const auto& c : mscv::invariant_suite()) {
        std::printf("%s  %s  (%s)\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        failed += c.passed ? 0 : 1;
    }
    return failed ? exit_numerical : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-scale control variate estimators for kinetic equations with random inputs"};
    app.require_subcommand(1);

    RunFlags flags;
    auto* run = app.add_subcommand("run", "run one experiment and write CSV output");
    run->add_option("--test", flags.test, "experiment 1..5");
    run->add_option("--config", flags.config, "key = value file; flags override it")->check(CLI::ExistingFile);
    run->add_option("--eps", flags.eps, "Knudsen number (tests 3-5)");
    run->add_option("--samples", flags.samples, "M, high-fidelity samples");
    run->add_option("--cv", flags.cv, "none, equilibrium, bgk or euler");
    run->add_option("--lambda", flags.lambda, "zero, one, optimal, optimal-moment or cost-corrected");
    run->add_option("--me", flags.me, "M_E, control-variate samples (0: collocated mean)");
    run->add_option("--seed", flags.seed, "random seed");
    run->add_option("--scale", flags.scale, "desk or paper");
    run->add_option("--set", flags.set, "any config key, as key=value (repeatable)");
    run->add_option("--out", flags.out, "output directory");

    std::string cost_path;
    auto* allocate = app.add_subcommand("allocate", "control-variate sample counts from the cost model");
    allocate->add_option("--cost-config", cost_path, "key = value cost file")->required()->check(CLI::ExistingFile);

    auto* validate = app.add_subcommand("validate", "run the invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return exit_config;
    }

    try {
        if (run->parsed()) return do_run(flags);
        if (allocate->parsed()) return do_allocate(cost_path);
        if (validate->parsed()) return do_validate();
    } catch (const mscv::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const mscv::ConsistencyError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const mscv::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_config;
}
