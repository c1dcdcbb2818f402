#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "byzrep/bit_window.hpp"
#include "byzrep/clustering.hpp"
#include "byzrep/fusion.hpp"
#include "byzrep/model.hpp"

namespace byzrep {

/// M(a, b): +1 on agreement, -1 otherwise.
inline int agreement(Bit a, Bit b) noexcept { return a == b ? 1 : -1; }

struct ReputationLedger {
    std::vector<double> r;        ///< per-sensor reputation index
    std::vector<double> R;        ///< per-cluster mean reputation, NaN for empty clusters
    std::vector<Bit> removed;     ///< sensors excluded by tau in the current step
    BitWindow anchor_history;     ///< A(q), newest first

    ReputationLedger() = default;
    ReputationLedger(std::size_t n_sensors, double r_init, std::size_t window)
        : r(n_sensors, r_init), removed(n_sensors, 0), anchor_history(window) {}
};

/// H = 1 / (1 + D), D being the MMS-window Hamming distance to the medoid.
inline double reputation_impact(std::size_t mms_distance) noexcept {
    return 1.0 / (1.0 + static_cast<double>(mms_distance));
}

inline double reputation_impact(const ClusterAssignment& a, std::span<const SensorState> sensors,
                                std::size_t i, std::size_t c) {
    if (a.cluster_of[i] != c || !a.medoid[c]) return 0.0;
    return reputation_impact(hamming(sensors[i].mms, sensors[*a.medoid[c]].mms));
}

/// g_k = sum M(u_i, V_k) I_i / sum I_i, in [-1, 1].
inline double step_size(std::span<const double> impacts, std::span<const Bit> reports, Bit vote) {
    if (impacts.empty() || impacts.size() != reports.size()) {
        throw std::invalid_argument("step_size: empty cluster");
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < impacts.size(); ++i) {
        num += agreement(reports[i], vote) * impacts[i];
        den += impacts[i];
    }
    return num / den;
}

/// R_k = mean of r_i over members of k.
inline std::vector<double> cluster_reputations(const ClusterAssignment& a, std::span<const double> r) {
    std::vector<double> out(a.num_clusters(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t c = 0; c < a.num_clusters(); ++c) {
        if (a.members[c].empty()) continue;
        double s = 0.0;
        for (auto i : a.members[c]) s += r[i];
        out[c] = s / static_cast<double>(a.members[c].size());
    }
    return out;
}

inline void refresh_cluster_reputations(ReputationLedger& ledger, const ClusterAssignment& a) {
    ledger.R = cluster_reputations(a, ledger.r);
}

/// Per-step update ingredients: H_i per sensor and g_k per cluster.
struct UpdateFactors {
    std::vector<double> h;
    std::vector<double> g;
};

inline UpdateFactors update_factors(const ClusterAssignment& a, std::span<const SensorState> sensors,
                                    const ClusterVotes& cv, std::span<const Bit> u) {
    UpdateFactors f;
    f.h.assign(sensors.size(), 0.0);
    f.g.assign(a.num_clusters(), 0.0);
    std::vector<double> imp;
    std::vector<Bit> rep;
    for (std::size_t c = 0; c < a.num_clusters(); ++c) {
        if (a.members[c].empty()) continue;
        imp.clear();
        rep.clear();
        for (auto i : a.members[c]) {
            f.h[i] = reputation_impact(a, sensors, i, c);
            imp.push_back(cv.impact[i]);
            rep.push_back(u[i]);
        }
        f.g[c] = step_size(imp, rep, cv.votes[c]);
    }
    return f;
}

namespace detail {

inline void apply_update(ReputationLedger& ledger, const ClusterAssignment& a,
                         std::span<const Bit> votes, Bit v_fc, const UpdateFactors& f,
                         double multiplier) {
    double h_total = 0.0;
    for (std::size_t i = 0; i < ledger.r.size(); ++i) {
        if (a.cluster_of[i] && !ledger.removed[i]) h_total += f.h[i];
    }
    if (h_total > 0.0) {
        for (std::size_t i = 0; i < ledger.r.size(); ++i) {
            if (!a.cluster_of[i] || ledger.removed[i]) continue;
            const std::size_t c = *a.cluster_of[i];
            ledger.r[i] += agreement(v_fc, votes[c]) * f.g[c] * multiplier * f.h[i] / h_total;
        }
    }
    refresh_cluster_reputations(ledger, a);
}

}  // namespace detail

/// r_i += M(v_fc, V_k) g_k H_i / sum H, then R_k is recomputed.
inline void update_rac(ReputationLedger& ledger, const ClusterAssignment& a,
                       std::span<const Bit> votes, Bit v_fc, const UpdateFactors& f) {
    detail::apply_update(ledger, a, votes, v_fc, f, 1.0);
}

/// Majority of anchor decisions; `tie_to_one` decides even splits.
inline Bit anchor_majority(std::span<const Bit> decisions, bool tie_to_one = true) {
    if (decisions.empty()) throw std::invalid_argument("anchor decision requires at least one anchor");
    std::size_t ones = 0;
    for (auto b : decisions) ones += b != 0;
    const std::size_t zeros = decisions.size() - ones;
    if (ones == zeros) return static_cast<Bit>(tie_to_one);
    return static_cast<Bit>(ones > zeros);
}

/**
 * f = (fraction of the anchor window equal to A(t)) * M(A(t), v_fc).
 * The window already contains A(t); during warm-up the fraction is taken
 * over the entries available.
 */
inline double anchor_factor(const BitWindow& history, Bit a_t, Bit v_fc) {
    if (history.empty()) throw std::logic_error("anchor_factor: empty anchor history");
    std::size_t same = 0;
    for (std::size_t q = 0; q < history.size(); ++q) same += history.at(q) == (a_t != 0);
    return static_cast<double>(same) / static_cast<double>(history.size()) * agreement(a_t, v_fc);
}

/// RACA update. Appends A(t) to the anchor window and scales the RAC step by f. Returns f.
inline double update_raca(ReputationLedger& ledger, const ClusterAssignment& a,
                          std::span<const Bit> votes, Bit v_fc, const UpdateFactors& f,
                          std::span<const Bit> anchor_decisions, bool tie_to_one = true) {
    const Bit a_t = anchor_majority(anchor_decisions, tie_to_one);
    ledger.anchor_history.push(a_t != 0);
    const double factor = anchor_factor(ledger.anchor_history, a_t, v_fc);
    detail::apply_update(ledger, a, votes, v_fc, f, factor);
    return factor;
}

struct ExclusionResult {
    FusionOutcome outcome;
    std::size_t iterations = 0;
    std::vector<Bit> excluded;  ///< per cluster
};

/**
 * Temporarily removes every cluster whose R_k is below tau and redoes the
 * inter-cluster vote on what is left, until no remaining cluster is below
 * tau. If nothing valid remains, the fallback decision is used. Cluster
 * votes are not recomputed: membership and impact factors are unchanged.
 */
inline ExclusionResult exclude_and_revote(ReputationLedger& ledger, const ClusterAssignment& a,
                                          std::span<const Bit> votes, const FusionParams& p,
                                          double lambda_valid, double tau, Bit fallback_decision,
                                          FusionOutcome initial) {
    ExclusionResult res;
    res.outcome = std::move(initial);
    res.excluded.assign(a.num_clusters(), 0);
    std::fill(ledger.removed.begin(), ledger.removed.end(), Bit{0});

    std::vector<std::size_t> sizes(a.num_clusters());
    for (std::size_t c = 0; c < a.num_clusters(); ++c) sizes[c] = a.members[c].size();

    while (res.iterations < a.num_clusters()) {
        bool any = false;
        for (std::size_t c = 0; c < a.num_clusters(); ++c) {
            if (res.excluded[c] || a.members[c].empty() || !(ledger.R[c] < tau)) continue;
            res.excluded[c] = 1;
            for (auto i : a.members[c]) ledger.removed[i] = 1;
            any = true;
        }
        if (!any) break;
        ++res.iterations;

        std::vector<Bit> validity(a.num_clusters(), 0);
        for (std::size_t c = 0; c < a.num_clusters(); ++c) {
            if (!res.excluded[c] && !a.members[c].empty()) {
                validity[c] = cluster_validity(ledger.R[c], lambda_valid);
            }
        }
        res.outcome = fuse(sizes, votes, validity, p, fallback_decision);
        if (res.outcome.fallback) break;
    }
    return res;
}

}  // namespace byzrep
