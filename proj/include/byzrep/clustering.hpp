#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "byzrep/bit_window.hpp"
#include "byzrep/model.hpp"
#include "byzrep/pam.hpp"

namespace byzrep {

/// Macro sets: Lower holds groups whose MMS window is all-match, Upper the rest.
enum class MacroSet : Bit { Lower = 0, Upper = 1 };

inline std::size_t hamming(std::span<const Bit> a, std::span<const Bit> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("hamming: bit sequences differ in length");
    }
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] != 0) != (b[i] != 0);
    return n;
}

/**
 * Cluster layout for one time step. Clusters [0, k) are drawn from the Lower
 * set and [k, 2k) from the Upper set; an id with no members has no medoid.
 */
struct ClusterAssignment {
    std::size_t k = 0;
    std::vector<MacroSet> macro;
    std::vector<std::optional<std::size_t>> cluster_of;
    std::vector<std::optional<std::size_t>> medoid;
    std::vector<std::vector<std::size_t>> members;

    [[nodiscard]] std::size_t num_clusters() const noexcept { return 2 * k; }
    [[nodiscard]] std::size_t size(std::size_t c) const { return members[c].size(); }
    [[nodiscard]] bool lower_half(std::size_t c) const noexcept { return c < k; }
};

/// Group-atomic macro split on the current MMS windows.
inline std::vector<MacroSet> macro_partition(std::span<const SensorState> sensors) {
    std::vector<MacroSet> out(sensors.size(), MacroSet::Upper);
    for (const auto& s : sensors) {
        if (s.mms.empty()) throw std::logic_error("macro_partition: empty MMS history");
    }
    for (const auto& s : sensors) {
        const auto& p = sensors[s.partner];
        out[s.id] = (s.mms.all_set() && p.mms.all_set()) ? MacroSet::Lower : MacroSet::Upper;
    }
    return out;
}

struct PamClusters {
    std::vector<std::size_t> medoids;  ///< sensor ids, ascending
    std::vector<std::size_t> labels;   ///< per member: position in `medoids`
    double cost = 0.0;
};

/// PAM over the decision windows of `members` (sensor ids, ascending).
inline PamClusters pam_cluster(std::span<const std::size_t> members,
                               std::span<const SensorState> sensors, std::size_t k) {
    const auto d = make_distance_matrix<std::uint32_t>(members.size(), [&](std::size_t a, std::size_t b) {
        return hamming(sensors[members[a]].decisions, sensors[members[b]].decisions);
    });
    auto res = pam(d, k);
    PamClusters out;
    out.cost = res.cost;
    out.labels = std::move(res.labels);
    for (auto m : res.medoids) out.medoids.push_back(members[m]);
    return out;
}

/// Macro partition followed by PAM inside each macro set.
inline ClusterAssignment assign_clusters(const Population& pop, std::size_t k) {
    const auto& sensors = pop.sensors;
    ClusterAssignment a;
    a.k = k;
    a.macro = macro_partition(sensors);
    a.cluster_of.assign(sensors.size(), std::nullopt);
    a.medoid.assign(2 * k, std::nullopt);
    a.members.assign(2 * k, {});

    for (auto set : {MacroSet::Lower, MacroSet::Upper}) {
        std::vector<std::size_t> ids;
        for (const auto& s : sensors) {
            if (a.macro[s.id] == set) ids.push_back(s.id);
        }
        if (ids.empty()) continue;
        const std::size_t offset = set == MacroSet::Lower ? 0 : k;
        const auto pc = pam_cluster(ids, sensors, k);
        for (std::size_t c = 0; c < pc.medoids.size(); ++c) a.medoid[offset + c] = pc.medoids[c];
        for (std::size_t m = 0; m < ids.size(); ++m) {
            const std::size_t c = offset + pc.labels[m];
            a.cluster_of[ids[m]] = c;
            a.members[c].push_back(ids[m]);
        }
    }
    return a;
}

}  // namespace byzrep
