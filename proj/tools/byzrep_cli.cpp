// byzrep command-line front end: run, sweep, theory and trace subcommands.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "byzrep/byzrep.hpp"

namespace {

using namespace byzrep;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string dashed(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

/// Options shared by every subcommand: config file, per-key overrides, output.
struct CommonOptions {
    std::string config_path;
    std::map<std::string, std::string> overrides;
    std::string output = "-";
    bool verbose = false;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "flat key = value configuration file");
        app->add_option("-o,--output", output, "output file ('-' for stdout)");
        app->add_flag("-v,--verbose", verbose, "echo the effective configuration to stderr");
        for (const auto& key : config_keys()) {
            app->add_option_function<std::string>(
                "--" + dashed(key), [this, key](const std::string& v) { overrides[key] = v; },
                "override " + key);
        }
    }

    /// Defaults, then config file, then BYZREP_* environment, then flags.
    [[nodiscard]] ScenarioConfig resolve() const {
        ScenarioConfig cfg;
        if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
        apply_env_overrides(cfg);
        for (const auto& [k, v] : overrides) {
            try {
                set_config_field(cfg, k, v);
            } catch (const ConfigError& e) {
                throw UsageError("--" + dashed(k) + ": " + e.what());
            }
        }
        validate_config(cfg);
        if (verbose) std::cerr << to_config_text(cfg);
        return cfg;
    }
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw std::runtime_error("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

Algorithm algorithm_arg(const std::string& s) {
    try {
        return parse_algorithm(s);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

std::vector<double> values_arg(const std::string& flag, const std::string& s) {
    try {
        return parse_values(s);
    } catch (const std::invalid_argument& e) {
        throw UsageError(flag + ": " + e.what());
    }
}

nlohmann::json config_json(const ScenarioConfig& cfg) {
    nlohmann::json j;
    for (const auto& key : config_keys()) j[key] = get_config_field(cfg, key);
    return j;
}

int cmd_run(const CommonOptions& common, const std::string& algo_name, std::size_t trials,
            std::size_t parallel) {
    const auto cfg = common.resolve();
    const auto algo = algorithm_arg(algo_name);
    if (algo == Algorithm::RACA && cfg.n_anchors == 0) {
        throw ConfigError("n_anchors", "RACA requires at least one anchor (n_anchors >= 1)");
    }
    Output out(common.output);
    auto& os = out.stream();
    if (trials <= 1) {
        write_step_trace_header(os);
        Rng rng(derive_seed(cfg.seed, 0, 0));
        run_trial(cfg, algo, rng, [&](std::size_t t, const Population&, const RoundReport& rep,
                                      const StepResult& res, const FusionCenter&) {
            write_step_trace_row(os, t, rep, res, cfg.anchor_tie_to_one);
        });
        return 0;
    }
    const auto trace = error_trace(cfg, algo, trials, parallel);
    os << "step,error\n";
    for (std::size_t t = 0; t < trace.size(); ++t) os << t + 1 << ',' << trace[t] << '\n';
    return 0;
}

int cmd_sweep(const CommonOptions& common, const std::string& variable, const std::string& values,
              std::size_t trials, const std::string& algo_name, std::size_t parallel,
              const std::string& json_path) {
    SweepSpec spec;
    spec.base = common.resolve();
    try {
        spec.variable = parse_sweep_variable(variable);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    spec.values = values_arg("--values", values);
    spec.trials = trials;
    spec.algorithm = algorithm_arg(algo_name);
    spec.parallel = parallel;
    const auto rows = run_sweep(spec);
    Output out(common.output);
    write_metric_csv(out.stream(), rows);
    if (!json_path.empty()) {
        nlohmann::json j;
        j["config"] = config_json(spec.base);
        j["sweep_variable"] = std::string(to_string(spec.variable));
        j["algorithm"] = std::string(to_string(spec.algorithm));
        j["trials"] = spec.trials;
        j["rows"] = nlohmann::json::array();
        for (const auto& r : rows) {
            j["rows"].push_back({{"value", r.value},
                                 {"error", r.error},
                                 {"identification", r.identification},
                                 {"honest_reputation", r.honest_reputation},
                                 {"byzantine_reputation", r.byzantine_reputation},
                                 {"trials", r.trials},
                                 {"se", r.se}});
        }
        std::ofstream f(json_path);
        if (!f) throw std::runtime_error("cannot open json file: " + json_path);
        f << j.dump(2) << '\n';
    }
    return 0;
}

int cmd_theory(const CommonOptions& common, const std::string& p1_text, const std::string& p2_text,
               std::size_t grid, std::size_t rounds, const std::string& field_list) {
    if (rounds == 0) throw UsageError("--rounds must be positive");
    const auto cfg = common.resolve();
    std::vector<double> p1s, p2s;
    if (grid > 0) {
        if (grid < 2) throw UsageError("--grid must be at least 2");
        for (std::size_t i = 0; i < grid; ++i) p1s.push_back(double(i) / double(grid - 1));
        p2s = p1s;
    } else {
        p1s = p1_text.empty() ? std::vector<double>{cfg.attack.p1} : values_arg("--p1-range", p1_text);
        p2s = p2_text.empty() ? std::vector<double>{cfg.attack.p2} : values_arg("--p2-range", p2_text);
    }
    // Range stepping can land a rounding error past 0 or 1.
    auto snap = [](std::vector<double>& v, const char* name) {
        for (double& p : v) {
            if (p < 0 && p > -1e-9) p = 0;
            if (p > 1 && p < 1 + 1e-9) p = 1;
            if (p < 0 || p > 1) throw ConfigError(name, std::string(name) + " out of [0,1]");
        }
    };
    snap(p1s, "p1");
    snap(p2s, "p2");
    const auto probe = analysis::fields(analysis::TheoryPoint{});
    std::vector<std::size_t> cols;
    if (field_list.empty()) {
        for (std::size_t c = 0; c < probe.size(); ++c) cols.push_back(c);
    } else {
        std::stringstream ss(field_list);
        std::string name;
        while (std::getline(ss, name, ',')) {
            const auto it = std::find_if(probe.begin(), probe.end(), [&](const auto& f) { return f.first == name; });
            if (it == probe.end()) throw UsageError("unknown theory field '" + name + "'");
            cols.push_back(static_cast<std::size_t>(it - probe.begin()));
        }
    }
    Output out(common.output);
    auto& os = out.stream();
    os << std::setprecision(12);
    for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << probe[cols[c]].first;
    os << '\n';
    for (double p1 : p1s) {
        for (double p2 : p2s) {
            const auto f = analysis::fields(analysis::theory_point(cfg.attack.alpha0, p1, p2, cfg.sensor.p_d,
                                                                   cfg.sensor.p_f, cfg.prior_h1, rounds));
            for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << f[cols[c]].second;
            os << '\n';
        }
    }
    return 0;
}

int cmd_trace(const CommonOptions& common, const std::string& algo_name, std::size_t every) {
    const auto cfg = common.resolve();
    const auto algo = algorithm_arg(algo_name);
    if (!uses_reputation(algo)) throw UsageError("trace needs a reputation algorithm (RAC or RACA)");
    if (algo == Algorithm::RACA && cfg.n_anchors == 0) {
        throw ConfigError("n_anchors", "RACA requires at least one anchor (n_anchors >= 1)");
    }
    if (every == 0) throw UsageError("--every must be positive");
    Output out(common.output);
    auto& os = out.stream();
    write_reputation_header(os);
    Rng rng(derive_seed(cfg.seed, 0, 0));
    run_trial(cfg, algo, rng, [&](std::size_t t, const Population& pop, const RoundReport&,
                                  const StepResult& res, const FusionCenter& fc) {
        if (t % every == 0 || t == cfg.n_steps) write_reputation_rows(os, t, pop, res, fc.ledger());
    });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reputation-based Byzantine defense for distributed detection"};
    app.require_subcommand(1);

    CommonOptions run_opts, sweep_opts, theory_opts, trace_opts;
    std::string run_algo = "RAC", sweep_algo = "RAC", trace_algo = "RAC";
    std::size_t run_trials = 1, sweep_trials = 20, run_parallel = 0, sweep_parallel = 0, every = 100;
    std::size_t grid = 0, rounds = 1;
    std::string sweep_var, sweep_values, json_path, p1_range, p2_range, theory_fields;

    auto* run = app.add_subcommand("run", "simulate one trial and write the per-step trace");
    run_opts.attach(run);
    run->add_option("--algorithm", run_algo, "RAC, RACA, MajorityBaseline or OracleBaseline");
    run->add_option("--trials", run_trials, "with more than one trial, write the ensemble error curve");
    run->add_option("--parallel", run_parallel, "worker threads (0 = all cores)");

    auto* sweep = app.add_subcommand("sweep", "error / identification sweep over one parameter");
    sweep_opts.attach(sweep);
    sweep->add_option("--sweep-variable", sweep_var, "p1, p2, alpha0, T, J or K")->required();
    sweep->add_option("--values", sweep_values, "a:b:step or comma list")->required();
    sweep->add_option("--trials", sweep_trials, "trials per value");
    sweep->add_option("--algorithm", sweep_algo, "RAC, RACA, MajorityBaseline or OracleBaseline");
    sweep->add_option("--parallel", sweep_parallel, "worker threads (0 = all cores)");
    sweep->add_option("--json", json_path, "also write rows and the full configuration as JSON");

    auto* theory = app.add_subcommand("theory", "closed-form quantities over a (p1, p2) grid");
    theory_opts.attach(theory);
    theory->add_option("--p1-range", p1_range, "p1 values, a:b:step or comma list");
    theory->add_option("--p2-range", p2_range, "p2 values, a:b:step or comma list");
    theory->add_option("--grid", grid, "N x N grid over [0,1]^2 (overrides the ranges)");
    theory->add_option("--rounds", rounds, "consecutive all-match rounds defining the lower set");
    theory->add_option("--fields", theory_fields, "comma-separated subset of columns");

    auto* trace = app.add_subcommand("trace", "reputation snapshots of one trial");
    trace_opts.attach(trace);
    trace->add_option("--algorithm", trace_algo, "RAC or RACA");
    trace->add_option("--every", every, "snapshot period in steps");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*run) return cmd_run(run_opts, run_algo, run_trials, run_parallel);
        if (*sweep) return cmd_sweep(sweep_opts, sweep_var, sweep_values, sweep_trials, sweep_algo,
                                     sweep_parallel, json_path);
        if (*theory) return cmd_theory(theory_opts, p1_range, p2_range, grid, rounds, theory_fields);
        if (*trace) return cmd_trace(trace_opts, trace_algo, every);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
