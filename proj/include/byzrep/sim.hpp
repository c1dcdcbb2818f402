#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "byzrep/model.hpp"
#include "byzrep/random.hpp"

namespace byzrep {

/// Everything produced by one time step. The FC sees u, z (hence mms) and the
/// anchor decisions; truth and v are kept for scoring and the oracle baseline.
struct RoundReport {
    Hypothesis truth = Hypothesis::H0;
    double p1_effective = 0.0;
    BitVector v;
    BitVector u;
    BitVector z;    ///< z_i: sensor i's w-bit as relayed by its partner
    BitVector mms;  ///< 1 iff u_i == z_i
    BitVector anchor_decisions;
};

inline Hypothesis draw_truth(double prior_h1, Rng& rng) {
    return bernoulli(rng, prior_h1) ? Hypothesis::H1 : Hypothesis::H0;
}

inline Bit local_decision(Hypothesis truth, const SensorModel& sensor, Rng& rng) {
    const double p_one = truth == Hypothesis::H1 ? sensor.p_d : sensor.p_f;
    return static_cast<Bit>(bernoulli(rng, p_one));
}

struct Exchange {
    BitVector u;
    BitVector z;
};

/**
 * Applies Byzantine corruption and the simultaneous intra-group exchange.
 *
 * Honest sensors send u = w = v and relay their partner's w verbatim. A
 * Byzantine sensor flips u and w independently, each with probability
 * p1_of(i), and flips the relayed copy of its partner's w with probability p2.
 */
template <typename P1Of>
Exchange corrupt_and_exchange(std::span<const Bit> v, std::span<const SensorState> sensors,
                              P1Of&& p1_of, double p2, Rng& rng) {
    const std::size_t n = sensors.size();
    Exchange out{BitVector(n), BitVector(n)};
    BitVector w(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.u[i] = v[i];
        w[i] = v[i];
        if (sensors[i].byzantine()) {
            const double p1 = p1_of(i);
            out.u[i] ^= static_cast<Bit>(bernoulli(rng, p1));
            w[i] ^= static_cast<Bit>(bernoulli(rng, p1));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& relay = sensors[sensors[i].partner];
        out.z[i] = w[i];
        if (relay.byzantine()) out.z[i] ^= static_cast<Bit>(bernoulli(rng, p2));
    }
    return out;
}

inline Exchange corrupt_and_exchange(std::span<const Bit> v, std::span<const SensorState> sensors,
                                     double p1, double p2, Rng& rng) {
    return corrupt_and_exchange(v, sensors, [p1](std::size_t) { return p1; }, p2, rng);
}

/// Uniform draw on [p1 - jitter, p1 + jitter], clamped to [0, 1].
inline double jittered_p1(const AttackParams& attack, Rng& rng) {
    if (attack.jitter <= 0.0) return attack.p1;
    return std::clamp(uniform(rng, attack.p1 - attack.jitter, attack.p1 + attack.jitter), 0.0, 1.0);
}

/// Runs one time step and appends u_i / mms_i to each sensor's windows.
inline RoundReport step(Population& pop, const ScenarioConfig& cfg, Rng& rng) {
    const std::size_t n = pop.size();
    RoundReport rep;
    rep.truth = draw_truth(cfg.prior_h1, rng);

    std::vector<double> per_sensor;
    if (cfg.attack.per_sensor_jitter && cfg.attack.jitter > 0.0) {
        per_sensor.resize(n, cfg.attack.p1);
        for (std::size_t i = 0; i < n; ++i) {
            if (pop.sensors[i].byzantine()) per_sensor[i] = jittered_p1(cfg.attack, rng);
        }
        rep.p1_effective = cfg.attack.p1;
    } else {
        rep.p1_effective = jittered_p1(cfg.attack, rng);
    }

    rep.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) rep.v[i] = local_decision(rep.truth, cfg.sensor, rng);

    auto ex = per_sensor.empty()
                  ? corrupt_and_exchange(rep.v, pop.sensors, rep.p1_effective, cfg.attack.p2, rng)
                  : corrupt_and_exchange(
                        rep.v, pop.sensors, [&](std::size_t i) { return per_sensor[i]; },
                        cfg.attack.p2, rng);
    rep.u = std::move(ex.u);
    rep.z = std::move(ex.z);

    rep.mms.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rep.mms[i] = static_cast<Bit>(rep.u[i] == rep.z[i]);
        pop.sensors[i].decisions.push(rep.u[i] != 0);
        pop.sensors[i].mms.push(rep.mms[i] != 0);
    }

    rep.anchor_decisions.resize(pop.n_anchors);
    for (auto& a : rep.anchor_decisions) a = local_decision(rep.truth, cfg.sensor, rng);
    return rep;
}

}  // namespace byzrep
