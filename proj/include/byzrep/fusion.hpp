#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "byzrep/clustering.hpp"
#include "byzrep/model.hpp"

namespace byzrep {

/// 1 / (1 + d). The +1 keeps the medoid (d = 0) finite and maximal.
inline double impact_factor(std::size_t distance) noexcept {
    return 1.0 / (1.0 + static_cast<double>(distance));
}

/// I_i for sensor i with respect to cluster c; 0 when i is not in c.
inline double impact_factor(const ClusterAssignment& a, std::span<const SensorState> sensors,
                            std::size_t i, std::size_t c) {
    if (a.cluster_of[i] != c || !a.medoid[c]) return 0.0;
    return impact_factor(hamming(sensors[i].decisions, sensors[*a.medoid[c]].decisions));
}

/// Weighted vote rounded half-up: 1 iff sum(I u) / sum(I) >= 1/2.
inline Bit cluster_vote(std::span<const double> impacts, std::span<const Bit> reports) {
    if (impacts.empty() || impacts.size() != reports.size()) {
        throw std::invalid_argument("cluster_vote: empty cluster");
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < impacts.size(); ++i) {
        num += impacts[i] * reports[i];
        den += impacts[i];
    }
    if (!(den > 0.0)) throw std::invalid_argument("cluster_vote: zero total impact");
    return static_cast<Bit>(2.0 * num >= den);
}

/// F_k = 0 iff R_k < lambda_valid.
inline Bit cluster_validity(double reputation, double lambda_valid) noexcept {
    return static_cast<Bit>(!(reputation < lambda_valid));
}

/**
 * Inter-cluster weights. Y_k = n_k F_k / sum(n F) over all 2k clusters, then
 * renormalised inside its half. Returns nullopt when every cluster has
 * n_k F_k = 0; a half with no valid cluster gets all-zero weights.
 */
inline std::optional<std::vector<double>> beta_weights(std::span<const std::size_t> sizes,
                                                       std::span<const Bit> validity,
                                                       std::size_t k) {
    if (sizes.size() != 2 * k || validity.size() != 2 * k) {
        throw std::invalid_argument("beta_weights: expected 2k clusters");
    }
    double total = 0.0;
    for (std::size_t c = 0; c < 2 * k; ++c) total += static_cast<double>(sizes[c] * validity[c]);
    if (total <= 0.0) return std::nullopt;

    std::vector<double> y(2 * k);
    for (std::size_t c = 0; c < 2 * k; ++c) y[c] = static_cast<double>(sizes[c] * validity[c]) / total;

    std::vector<double> beta(2 * k, 0.0);
    for (std::size_t half = 0; half < 2; ++half) {
        double sum = 0.0;
        for (std::size_t c = half * k; c < (half + 1) * k; ++c) sum += y[c];
        if (sum <= 0.0) continue;
        for (std::size_t c = half * k; c < (half + 1) * k; ++c) beta[c] = y[c] / sum;
    }
    return beta;
}

struct Decision {
    Bit decision = 0;
    double score = 0.0;
};

/// gamma1 * sum_{lower} beta V + gamma2 * sum_{upper} beta V, compared strictly with lambda_fc.
inline Decision fc_decision(std::span<const Bit> votes, std::span<const double> betas, std::size_t k,
                            double gamma1, double gamma2, double lambda_fc) {
    if (votes.size() != 2 * k || betas.size() != 2 * k) {
        throw std::invalid_argument("fc_decision: expected 2k clusters");
    }
    double lower = 0.0, upper = 0.0;
    for (std::size_t c = 0; c < k; ++c) lower += betas[c] * votes[c];
    for (std::size_t c = k; c < 2 * k; ++c) upper += betas[c] * votes[c];
    const double score = gamma1 * lower + gamma2 * upper;
    return {static_cast<Bit>(score > lambda_fc), score};
}

struct FusionOutcome {
    std::vector<Bit> votes;       ///< V_k (0 for empty clusters)
    std::vector<Bit> validity;    ///< F_k as used for this decision
    std::vector<double> betas;    ///< all zero on fallback
    Bit decision = 0;
    double score = 0.0;
    bool fallback = false;        ///< no valid cluster: decision came from the fallback rule
};

/// Per-step intra-cluster quantities: I_i for every sensor and V_k for every cluster.
struct ClusterVotes {
    std::vector<double> impact;  ///< I_i, 0 for unclustered sensors
    std::vector<Bit> votes;      ///< V_k, 0 for empty clusters
};

inline ClusterVotes intra_cluster_votes(const ClusterAssignment& a,
                                        std::span<const SensorState> sensors,
                                        std::span<const Bit> u) {
    ClusterVotes cv;
    cv.impact.assign(sensors.size(), 0.0);
    cv.votes.assign(a.num_clusters(), 0);
    std::vector<double> imp;
    std::vector<Bit> rep;
    for (std::size_t c = 0; c < a.num_clusters(); ++c) {
        if (a.members[c].empty()) continue;
        imp.clear();
        rep.clear();
        for (auto i : a.members[c]) {
            cv.impact[i] = impact_factor(a, sensors, i, c);
            imp.push_back(cv.impact[i]);
            rep.push_back(u[i]);
        }
        cv.votes[c] = cluster_vote(imp, rep);
    }
    return cv;
}

struct FusionParams {
    std::size_t k = 5;
    double gamma1 = 1.5;
    double gamma2 = 0.5;
    double lambda_fc = 1.0;
};

inline FusionParams fusion_params(const ScenarioConfig& cfg) {
    return {cfg.k_clusters, cfg.gamma1, cfg.gamma2, cfg.lambda_fc};
}

/// Inter-cluster vote; `fallback_decision` is used when no cluster is valid.
inline FusionOutcome fuse(std::span<const std::size_t> sizes, std::span<const Bit> votes,
                          std::span<const Bit> validity, const FusionParams& p,
                          Bit fallback_decision) {
    FusionOutcome out;
    out.votes.assign(votes.begin(), votes.end());
    out.validity.assign(validity.begin(), validity.end());
    if (auto beta = beta_weights(sizes, validity, p.k)) {
        out.betas = std::move(*beta);
        const auto d = fc_decision(out.votes, out.betas, p.k, p.gamma1, p.gamma2, p.lambda_fc);
        out.decision = d.decision;
        out.score = d.score;
    } else {
        out.betas.assign(2 * p.k, 0.0);
        out.decision = fallback_decision;
        out.fallback = true;
    }
    return out;
}

/// Unweighted majority, ties to 1.
inline Bit majority(std::span<const Bit> bits) noexcept {
    std::size_t ones = 0;
    for (auto b : bits) ones += b != 0;
    return static_cast<Bit>(2 * ones >= bits.size());
}

}  // namespace byzrep
