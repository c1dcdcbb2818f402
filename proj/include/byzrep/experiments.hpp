#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "byzrep/model.hpp"
#include "byzrep/pipeline.hpp"
#include "byzrep/random.hpp"
#include "byzrep/sim.hpp"

namespace byzrep {

/// Called once per step with the state after the FC has processed it.
using StepObserver = std::function<void(std::size_t step, const Population&, const RoundReport&,
                                        const StepResult&, const FusionCenter&)>;

struct TrialResult {
    std::vector<Bit> errors;  ///< per step: final decision != truth
    double error_rate = 0.0;  ///< over steps after the first `window` (all steps if none)
    double identification = std::numeric_limits<double>::quiet_NaN();
    double mean_r_honest = std::numeric_limits<double>::quiet_NaN();
    double mean_r_byzantine = std::numeric_limits<double>::quiet_NaN();
};

/**
 * Fraction of Byzantines that, at the given step, sit in an invalid cluster
 * (F_k = 0) or in a cluster excluded by tau. 1 when there are no Byzantines.
 */
inline double identification_fraction(const Population& pop, const StepResult& step) {
    std::size_t byz = 0, caught = 0;
    for (const auto& s : pop.sensors) {
        if (!s.byzantine()) continue;
        ++byz;
        const auto& c = step.assignment.cluster_of[s.id];
        if (!c) continue;
        const bool excluded = !step.excluded.empty() && step.excluded[*c];
        const bool invalid = !step.outcome.validity.empty() && step.outcome.validity[*c] == 0;
        caught += excluded || invalid;
    }
    return byz == 0 ? 1.0 : static_cast<double>(caught) / static_cast<double>(byz);
}

namespace detail {

inline double mean_reputation(const Population& pop, const ReputationLedger& ledger, Role role) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& x : pop.sensors) {
        if (x.role != role) continue;
        s += ledger.r[x.id];
        ++n;
    }
    return n == 0 ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(n);
}

}  // namespace detail

/// One independent Monte Carlo trial of `cfg.n_steps` steps.
inline TrialResult run_trial(const ScenarioConfig& cfg, Algorithm algorithm, Rng& rng,
                             const StepObserver& observer = {}) {
    validate_config(cfg);
    auto pop = build_population(cfg, rng);
    FusionCenter fc(cfg, algorithm);

    TrialResult tr;
    tr.errors.reserve(cfg.n_steps);
    StepResult last;
    for (std::size_t t = 1; t <= cfg.n_steps; ++t) {
        const auto rep = step(pop, cfg, rng);
        last = fc.process(pop, rep);
        tr.errors.push_back(static_cast<Bit>(last.decision != to_bit(rep.truth)));
        if (observer) observer(t, pop, rep, last, fc);
    }

    const std::size_t skip = cfg.n_steps > cfg.window ? cfg.window : 0;
    std::size_t wrong = 0;
    for (std::size_t t = skip; t < tr.errors.size(); ++t) wrong += tr.errors[t];
    tr.error_rate = static_cast<double>(wrong) / static_cast<double>(tr.errors.size() - skip);

    if (uses_reputation(algorithm)) {
        tr.identification = identification_fraction(pop, last);
        tr.mean_r_honest = detail::mean_reputation(pop, fc.ledger(), Role::Honest);
        tr.mean_r_byzantine = detail::mean_reputation(pop, fc.ledger(), Role::Byzantine);
    }
    return tr;
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads (0 = hardware concurrency).
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
}

enum class SweepVariable { P1, P2, Alpha0, Window, Anchors, Clusters };

inline std::string_view to_string(SweepVariable v) noexcept {
    switch (v) {
        case SweepVariable::P1: return "p1";
        case SweepVariable::P2: return "p2";
        case SweepVariable::Alpha0: return "alpha0";
        case SweepVariable::Window: return "T";
        case SweepVariable::Anchors: return "J";
        case SweepVariable::Clusters: return "K";
    }
    return "?";
}

inline SweepVariable parse_sweep_variable(std::string_view s) {
    for (auto v : {SweepVariable::P1, SweepVariable::P2, SweepVariable::Alpha0,
                   SweepVariable::Window, SweepVariable::Anchors, SweepVariable::Clusters}) {
        if (s == to_string(v)) return v;
    }
    if (s == "window") return SweepVariable::Window;
    if (s == "n_anchors") return SweepVariable::Anchors;
    if (s == "k_clusters") return SweepVariable::Clusters;
    throw std::invalid_argument("unknown sweep variable '" + std::string(s) + "'");
}

/// Copy of `base` with the swept field set to `value` (integers are rounded).
inline ScenarioConfig apply_sweep_value(ScenarioConfig cfg, SweepVariable var, double value) {
    auto as_count = [&](const char* field) {
        if (!(value >= 0.0) || std::abs(value - std::round(value)) > 1e-9) {
            throw ConfigError(field, std::string(field) + " sweep values must be non-negative integers");
        }
        return static_cast<std::size_t>(std::llround(value));
    };
    switch (var) {
        case SweepVariable::P1: cfg.attack.p1 = value; break;
        case SweepVariable::P2: cfg.attack.p2 = value; break;
        case SweepVariable::Alpha0: cfg.attack.alpha0 = value; break;
        case SweepVariable::Window: cfg.window = as_count("window"); break;
        case SweepVariable::Anchors: cfg.n_anchors = as_count("n_anchors"); break;
        case SweepVariable::Clusters: cfg.k_clusters = as_count("k_clusters"); break;
    }
    validate_config(cfg);
    return cfg;
}

struct SweepSpec {
    ScenarioConfig base;
    SweepVariable variable = SweepVariable::P1;
    std::vector<double> values;
    std::size_t trials = 20;
    Algorithm algorithm = Algorithm::RAC;
    std::size_t parallel = 0;  ///< worker threads, 0 = hardware concurrency
};

struct MetricRow {
    double value = 0.0;
    double error = 0.0;
    double identification = 0.0;
    double honest_reputation = 0.0;
    double byzantine_reputation = 0.0;
    std::size_t trials = 0;
    double se = 0.0;  ///< standard error of `error` across trials
};

struct SampleStats {
    double mean = 0.0;
    double se = 0.0;
};

inline SampleStats sample_stats(const std::vector<double>& xs) {
    SampleStats s;
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return s;
}

/**
 * Every (value, trial) cell runs on its own population and RNG seeded with
 * derive_seed(base.seed, value index, trial index). Aggregation happens after
 * all cells finish, so results do not depend on scheduling.
 */
inline std::vector<MetricRow> run_sweep(const SweepSpec& spec) {
    if (spec.trials == 0) throw std::invalid_argument("trials must be at least 1");
    std::vector<ScenarioConfig> cfgs;
    for (double v : spec.values) {
        auto cfg = apply_sweep_value(spec.base, spec.variable, v);
        if (spec.algorithm == Algorithm::RACA && cfg.n_anchors == 0) {
            throw ConfigError("n_anchors", "RACA requires at least one anchor (n_anchors >= 1)");
        }
        cfgs.push_back(cfg);
    }

    const std::size_t cells = cfgs.size() * spec.trials;
    std::vector<TrialResult> results(cells);
    parallel_for(cells, spec.parallel, [&](std::size_t cell) {
        const std::size_t vi = cell / spec.trials;
        const std::size_t ti = cell % spec.trials;
        Rng rng(derive_seed(spec.base.seed, vi, ti));
        auto tr = run_trial(cfgs[vi], spec.algorithm, rng);
        tr.errors.clear();
        tr.errors.shrink_to_fit();
        results[cell] = std::move(tr);
    });

    std::vector<MetricRow> rows;
    for (std::size_t vi = 0; vi < cfgs.size(); ++vi) {
        std::vector<double> err, ident, rh, rb;
        for (std::size_t ti = 0; ti < spec.trials; ++ti) {
            const auto& tr = results[vi * spec.trials + ti];
            err.push_back(tr.error_rate);
            ident.push_back(tr.identification);
            rh.push_back(tr.mean_r_honest);
            rb.push_back(tr.mean_r_byzantine);
        }
        const auto e = sample_stats(err);
        MetricRow row;
        row.value = spec.values[vi];
        row.error = e.mean;
        row.se = e.se;
        row.identification = sample_stats(ident).mean;
        row.honest_reputation = sample_stats(rh).mean;
        row.byzantine_reputation = sample_stats(rb).mean;
        row.trials = spec.trials;
        rows.push_back(row);
    }
    return rows;
}

/// Per-step error probability averaged over `trials` independent runs.
inline std::vector<double> error_trace(const ScenarioConfig& cfg, Algorithm algorithm,
                                       std::size_t trials, std::size_t parallel = 0) {
    std::vector<std::vector<Bit>> runs(trials);
    parallel_for(trials, parallel, [&](std::size_t ti) {
        Rng rng(derive_seed(cfg.seed, 0, ti));
        runs[ti] = run_trial(cfg, algorithm, rng).errors;
    });
    std::vector<double> out(cfg.n_steps, 0.0);
    for (const auto& r : runs) {
        for (std::size_t t = 0; t < r.size(); ++t) out[t] += r[t];
    }
    for (auto& x : out) x /= static_cast<double>(trials);
    return out;
}

/// Parses "a:b:step" (inclusive within 1e-9) or a comma-separated list.
inline std::vector<double> parse_values(std::string_view text) {
    auto to_double = [](std::string_view s) {
        std::string str(s);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(str, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != str.size()) {
            throw std::invalid_argument("bad number '" + str + "' in value list");
        }
        return v;
    };
    std::vector<double> out;
    if (text.empty()) return out;
    if (text.find(':') != std::string_view::npos) {
        const auto c1 = text.find(':');
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string_view::npos) throw std::invalid_argument("range must be a:b:step");
        const double a = to_double(text.substr(0, c1));
        const double b = to_double(text.substr(c1 + 1, c2 - c1 - 1));
        const double st = to_double(text.substr(c2 + 1));
        if (!(st > 0.0)) throw std::invalid_argument("range step must be positive");
        for (std::size_t i = 0;; ++i) {
            const double v = a + static_cast<double>(i) * st;
            if (v > b + 1e-9) break;
            out.push_back(v);
        }
        return out;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto piece = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
        out.push_back(to_double(piece));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

namespace detail {

inline std::string fmt_num(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace detail

inline void write_metric_csv(std::ostream& os, const std::vector<MetricRow>& rows) {
    os << "value,error,identification,honest_reputation,byzantine_reputation,trials,se\n";
    for (const auto& r : rows) {
        os << detail::fmt_num(r.value) << ',' << detail::fmt_num(r.error) << ','
           << detail::fmt_num(r.identification) << ',' << detail::fmt_num(r.honest_reputation) << ','
           << detail::fmt_num(r.byzantine_reputation) << ',' << r.trials << ','
           << detail::fmt_num(r.se) << '\n';
    }
}

/// Per-step trace columns: step, truth, u popcount, mms popcount, anchor majority, decision, error.
inline void write_step_trace_header(std::ostream& os) {
    os << "step,truth,u_ones,mms_matches,anchor_majority,decision,error\n";
}

inline void write_step_trace_row(std::ostream& os, std::size_t t, const RoundReport& rep,
                                 const StepResult& res, bool anchor_tie_to_one = true) {
    std::size_t u1 = 0, m1 = 0;
    for (auto b : rep.u) u1 += b;
    for (auto b : rep.mms) m1 += b;
    os << t << ',' << int(to_bit(rep.truth)) << ',' << u1 << ',' << m1 << ',';
    if (rep.anchor_decisions.empty()) {
        os << "";
    } else {
        os << int(anchor_majority(rep.anchor_decisions, anchor_tie_to_one));
    }
    os << ',' << int(res.decision) << ',' << int(res.decision != to_bit(rep.truth)) << '\n';
}

/// Reputation snapshot columns: step, sensor, role, r, cluster (-1 if none), removed.
inline void write_reputation_header(std::ostream& os) {
    os << "step,sensor,role,reputation,cluster,removed\n";
}

inline void write_reputation_rows(std::ostream& os, std::size_t t, const Population& pop,
                                  const StepResult& res, const ReputationLedger& ledger) {
    for (const auto& s : pop.sensors) {
        const auto& c = res.assignment.cluster_of.empty() ? std::nullopt : res.assignment.cluster_of[s.id];
        os << t << ',' << s.id << ',' << (s.byzantine() ? "B" : "H") << ','
           << detail::fmt_num(ledger.r[s.id]) << ',' << (c ? static_cast<long long>(*c) : -1LL) << ','
           << int(ledger.removed[s.id]) << '\n';
    }
}

}  // namespace byzrep
