#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "byzrep/clustering.hpp"
#include "byzrep/fusion.hpp"
#include "byzrep/model.hpp"
#include "byzrep/reputation.hpp"
#include "byzrep/sim.hpp"

namespace byzrep {

enum class Algorithm { RAC, RACA, MajorityBaseline, OracleBaseline };

inline std::string_view to_string(Algorithm a) noexcept {
    switch (a) {
        case Algorithm::RAC: return "RAC";
        case Algorithm::RACA: return "RACA";
        case Algorithm::MajorityBaseline: return "MajorityBaseline";
        case Algorithm::OracleBaseline: return "OracleBaseline";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
    for (auto a : {Algorithm::RAC, Algorithm::RACA, Algorithm::MajorityBaseline,
                   Algorithm::OracleBaseline}) {
        if (s == to_string(a)) return a;
    }
    throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

inline bool uses_reputation(Algorithm a) noexcept {
    return a == Algorithm::RAC || a == Algorithm::RACA;
}

struct StepResult {
    Bit decision = 0;          ///< final FC decision after exclusion
    Bit initial_decision = 0;  ///< decision that drove the reputation update
    ClusterAssignment assignment;
    FusionOutcome outcome;     ///< final inter-cluster outcome
    std::vector<Bit> excluded;
    std::size_t exclusion_iterations = 0;
    double anchor_factor = std::numeric_limits<double>::quiet_NaN();
};

/**
 * Fusion-center side of one trial: clustering, voting, reputation update and
 * tau-exclusion for RAC/RACA, or a plain majority for the baselines.
 */
class FusionCenter {
public:
    FusionCenter(const ScenarioConfig& cfg, Algorithm algorithm)
        : cfg_(validate_config(cfg)),
          algorithm_(algorithm),
          ledger_(cfg.n_sensors, cfg.r_init, cfg.window) {
        if (algorithm == Algorithm::RACA && cfg.n_anchors == 0) {
            throw ConfigError("n_anchors", "RACA requires at least one anchor (n_anchors >= 1)");
        }
    }

    [[nodiscard]] const ReputationLedger& ledger() const noexcept { return ledger_; }
    [[nodiscard]] Algorithm algorithm() const noexcept { return algorithm_; }

    StepResult process(const Population& pop, const RoundReport& rep) {
        switch (algorithm_) {
            case Algorithm::MajorityBaseline: return baseline(majority(rep.u));
            case Algorithm::OracleBaseline: {
                BitVector honest;
                for (const auto& s : pop.sensors) {
                    if (!s.byzantine()) honest.push_back(rep.v[s.id]);
                }
                return baseline(majority(honest));
            }
            default: return reputation_step(pop, rep);
        }
    }

private:
    static StepResult baseline(Bit d) {
        StepResult r;
        r.decision = d;
        r.initial_decision = d;
        return r;
    }

    StepResult reputation_step(const Population& pop, const RoundReport& rep) {
        const auto& sensors = pop.sensors;
        const auto params = fusion_params(cfg_);
        StepResult res;
        res.assignment = assign_clusters(pop, cfg_.k_clusters);
        const auto& a = res.assignment;

        const auto cv = intra_cluster_votes(a, sensors, rep.u);
        refresh_cluster_reputations(ledger_, a);

        std::vector<std::size_t> sizes(a.num_clusters());
        std::vector<Bit> validity(a.num_clusters(), 0);
        for (std::size_t c = 0; c < a.num_clusters(); ++c) {
            sizes[c] = a.members[c].size();
            if (sizes[c] > 0) validity[c] = cluster_validity(ledger_.R[c], cfg_.lambda_valid);
        }

        const bool raca = algorithm_ == Algorithm::RACA;
        const Bit fallback = raca ? anchor_majority(rep.anchor_decisions, cfg_.anchor_tie_to_one)
                                  : majority(rep.u);
        auto initial = fuse(sizes, cv.votes, validity, params, fallback);
        res.initial_decision = initial.decision;

        std::fill(ledger_.removed.begin(), ledger_.removed.end(), Bit{0});
        const auto factors = update_factors(a, sensors, cv, rep.u);
        if (raca) {
            res.anchor_factor = update_raca(ledger_, a, cv.votes, initial.decision, factors,
                                            rep.anchor_decisions, cfg_.anchor_tie_to_one);
        } else {
            update_rac(ledger_, a, cv.votes, initial.decision, factors);
        }

        auto ex = exclude_and_revote(ledger_, a, cv.votes, params, cfg_.lambda_valid, cfg_.tau,
                                     fallback, std::move(initial));
        res.outcome = std::move(ex.outcome);
        res.excluded = std::move(ex.excluded);
        res.exclusion_iterations = ex.iterations;
        res.decision = res.outcome.decision;
        return res;
    }

    ScenarioConfig cfg_;
    Algorithm algorithm_;
    ReputationLedger ledger_;
};

}  // namespace byzrep
