#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "byzrep/bit_window.hpp"
#include "byzrep/random.hpp"

namespace byzrep {

using Bit = std::uint8_t;
using BitVector = std::vector<Bit>;

enum class Hypothesis : Bit { H0 = 0, H1 = 1 };

enum class Role : Bit { Honest = 0, Byzantine = 1 };

inline Bit to_bit(Hypothesis h) noexcept { return static_cast<Bit>(h); }

/// Identical local detector for every sensor and anchor.
struct SensorModel {
    double p_d = 0.9;
    double p_f = 0.1;
};

struct AttackParams {
    double alpha0 = 0.35;  ///< fraction of Byzantine sensors
    double p1 = 0.5;       ///< own-decision flip probability
    double p2 = 0.5;       ///< relayed audit-bit flip probability
    double jitter = 0.0;   ///< half-width of the per-step uniform drift on p1
    bool per_sensor_jitter = false;
};

struct ScenarioConfig {
    std::size_t n_sensors = 100;
    std::size_t n_anchors = 0;
    SensorModel sensor{};
    AttackParams attack{};
    double prior_h1 = 0.5;
    std::size_t window = 20;
    std::size_t k_clusters = 5;
    double r_init = 0.5;
    double lambda_valid = 0.5;
    double tau = 0.5;
    double gamma1 = 1.5;
    double gamma2 = 0.5;
    double lambda_fc = 1.0;
    std::size_t n_steps = 2000;
    std::uint64_t seed = 1;
    bool anchor_tie_to_one = true;
};

/// Full-scale network (N = 500, T = 20).
inline ScenarioConfig full_scale_defaults() {
    ScenarioConfig cfg;
    cfg.n_sensors = 500;
    return cfg;
}

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(message), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

namespace detail {

inline void require_probability(const std::string& name, double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ConfigError(name, name + " out of [0,1]");
    }
}

inline void require_finite(const std::string& name, double value) {
    if (!std::isfinite(value)) throw ConfigError(name, name + " must be finite");
}

}  // namespace detail

/// Returns `cfg` unchanged if every invariant holds; throws ConfigError naming the field otherwise.
inline const ScenarioConfig& validate_config(const ScenarioConfig& cfg) {
    using detail::require_finite;
    using detail::require_probability;

    if (cfg.n_sensors == 0) throw ConfigError("n_sensors", "n_sensors must be positive");
    if (cfg.n_sensors % 2 != 0) throw ConfigError("n_sensors", "n_sensors must be even");
    require_probability("p_d", cfg.sensor.p_d);
    require_probability("p_f", cfg.sensor.p_f);
    if (!(cfg.sensor.p_f < cfg.sensor.p_d)) {
        throw ConfigError("p_f", "p_f must be strictly below p_d");
    }
    require_probability("alpha0", cfg.attack.alpha0);
    require_probability("p1", cfg.attack.p1);
    require_probability("p2", cfg.attack.p2);
    if (!(cfg.attack.jitter >= 0.0 && cfg.attack.jitter <= 0.5)) {
        throw ConfigError("jitter", "jitter out of [0,0.5]");
    }
    require_probability("prior_h1", cfg.prior_h1);
    if (cfg.window == 0) throw ConfigError("window", "window must be at least 1");
    if (cfg.k_clusters == 0) throw ConfigError("k_clusters", "k_clusters must be positive");
    if (cfg.n_steps == 0) throw ConfigError("n_steps", "n_steps must be positive");
    require_finite("r_init", cfg.r_init);
    require_finite("lambda_valid", cfg.lambda_valid);
    require_finite("tau", cfg.tau);
    require_finite("gamma1", cfg.gamma1);
    require_finite("gamma2", cfg.gamma2);
    require_finite("lambda_fc", cfg.lambda_fc);
    if (!(cfg.gamma1 > cfg.gamma2)) throw ConfigError("gamma1", "gamma1 must exceed gamma2");
    if (cfg.gamma2 < 0.0) throw ConfigError("gamma2", "gamma2 must be non-negative");
    return cfg;
}

/// Per-sensor state held by the fusion center.
struct SensorState {
    std::size_t id = 0;
    Role role = Role::Honest;
    std::size_t partner = 0;
    BitWindow decisions;  ///< reported u_i, newest first
    BitWindow mms;        ///< 1 = match (u_i == z_i)

    [[nodiscard]] bool byzantine() const noexcept { return role == Role::Byzantine; }
};

struct Population {
    std::vector<SensorState> sensors;
    std::size_t n_anchors = 0;

    [[nodiscard]] std::size_t size() const noexcept { return sensors.size(); }

    [[nodiscard]] std::size_t byzantine_count() const noexcept {
        return static_cast<std::size_t>(std::count_if(
            sensors.begin(), sensors.end(), [](const SensorState& s) { return s.byzantine(); }));
    }
};

inline std::size_t byzantine_count_for(const ScenarioConfig& cfg) {
    return static_cast<std::size_t>(
        std::llround(cfg.attack.alpha0 * static_cast<double>(cfg.n_sensors)));
}

/**
 * Builds the sensor population: exactly round(alpha0 * N) Byzantines at
 * uniformly random positions, then a random perfect matching into N/2 groups.
 * Anchors live outside the population; only their count is recorded.
 */
inline Population build_population(const ScenarioConfig& cfg, Rng& rng) {
    validate_config(cfg);
    const std::size_t n = cfg.n_sensors;

    std::vector<Role> roles(n, Role::Honest);
    std::fill_n(roles.begin(), byzantine_count_for(cfg), Role::Byzantine);
    std::shuffle(roles.begin(), roles.end(), rng);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    Population pop;
    pop.n_anchors = cfg.n_anchors;
    pop.sensors.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& s = pop.sensors[i];
        s.id = i;
        s.role = roles[i];
        s.decisions = BitWindow(cfg.window);
        s.mms = BitWindow(cfg.window);
    }
    for (std::size_t g = 0; g < n / 2; ++g) {
        const auto a = order[2 * g];
        const auto b = order[2 * g + 1];
        pop.sensors[a].partner = b;
        pop.sensors[b].partner = a;
    }
    return pop;
}

}  // namespace byzrep
