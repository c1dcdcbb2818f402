#pragma once

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <istream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "byzrep/model.hpp"

namespace byzrep {

/// Prefix for environment-variable overrides, e.g. BYZREP_ALPHA0=0.5.
inline constexpr std::string_view kEnvPrefix = "BYZREP_";

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline double parse_real(const std::string& key, const std::string& text) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
        throw ConfigError(key, key + ": expected a real number, got '" + text + "'");
    }
    return v;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (text.empty() || ec != std::errc{} || ptr != last) {
        throw ConfigError(key, key + ": expected a non-negative integer, got '" + text + "'");
    }
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
    if (text == "0" || text == "false" || text == "no" || text == "off") return false;
    throw ConfigError(key, key + ": expected a boolean, got '" + text + "'");
}

struct FieldAccess {
    std::function<void(ScenarioConfig&, const std::string&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

/// Shortest text that parses back to the same double.
inline std::string format_real(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename Ref>
FieldAccess real_field(const char* name, Ref ref) {
    return {[name, ref](ScenarioConfig& c, const std::string& t) { ref(c) = parse_real(name, t); },
            [ref](const ScenarioConfig& c) { return format_real(ref(c)); }};
}

template <typename Ref>
FieldAccess size_field(const char* name, Ref ref) {
    return {[name, ref](ScenarioConfig& c, const std::string& t) {
                using T = std::remove_reference_t<decltype(ref(c))>;
                ref(c) = static_cast<T>(parse_unsigned(name, t));
            },
            [ref](const ScenarioConfig& c) { return std::to_string(ref(c)); }};
}

template <typename Ref>
FieldAccess bool_field(const char* name, Ref ref) {
    return {[name, ref](ScenarioConfig& c, const std::string& t) { ref(c) = parse_bool(name, t); },
            [ref](const ScenarioConfig& c) { return std::string(ref(c) ? "true" : "false"); }};
}

inline const std::map<std::string, FieldAccess, std::less<>>& field_table() {
    // clang-format off
    static const std::map<std::string, FieldAccess, std::less<>> table = {
        {"n_sensors",         size_field("n_sensors",         [](auto& c) -> auto& { return c.n_sensors; })},
        {"n_anchors",         size_field("n_anchors",         [](auto& c) -> auto& { return c.n_anchors; })},
        {"p_d",               real_field("p_d",               [](auto& c) -> auto& { return c.sensor.p_d; })},
        {"p_f",               real_field("p_f",               [](auto& c) -> auto& { return c.sensor.p_f; })},
        {"alpha0",            real_field("alpha0",            [](auto& c) -> auto& { return c.attack.alpha0; })},
        {"p1",                real_field("p1",                [](auto& c) -> auto& { return c.attack.p1; })},
        {"p2",                real_field("p2",                [](auto& c) -> auto& { return c.attack.p2; })},
        {"jitter",            real_field("jitter",            [](auto& c) -> auto& { return c.attack.jitter; })},
        {"per_sensor_jitter", bool_field("per_sensor_jitter", [](auto& c) -> auto& { return c.attack.per_sensor_jitter; })},
        {"prior_h1",          real_field("prior_h1",          [](auto& c) -> auto& { return c.prior_h1; })},
        {"window",            size_field("window",            [](auto& c) -> auto& { return c.window; })},
        {"k_clusters",        size_field("k_clusters",        [](auto& c) -> auto& { return c.k_clusters; })},
        {"r_init",            real_field("r_init",            [](auto& c) -> auto& { return c.r_init; })},
        {"lambda_valid",      real_field("lambda_valid",      [](auto& c) -> auto& { return c.lambda_valid; })},
        {"tau",               real_field("tau",               [](auto& c) -> auto& { return c.tau; })},
        {"gamma1",            real_field("gamma1",            [](auto& c) -> auto& { return c.gamma1; })},
        {"gamma2",            real_field("gamma2",            [](auto& c) -> auto& { return c.gamma2; })},
        {"lambda_fc",         real_field("lambda_fc",         [](auto& c) -> auto& { return c.lambda_fc; })},
        {"n_steps",           size_field("n_steps",           [](auto& c) -> auto& { return c.n_steps; })},
        {"seed",              size_field("seed",              [](auto& c) -> auto& { return c.seed; })},
        {"anchor_tie_to_one", bool_field("anchor_tie_to_one", [](auto& c) -> auto& { return c.anchor_tie_to_one; })},
    };
    // clang-format on
    return table;
}

}  // namespace detail

/// All recognised configuration keys, in alphabetical order.
inline std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : detail::field_table()) keys.push_back(k);
    return keys;
}

/// Sets one field from its textual value. Unknown keys are rejected.
inline void set_config_field(ScenarioConfig& cfg, std::string_view key, const std::string& value) {
    const auto& table = detail::field_table();
    const auto it = table.find(key);
    if (it == table.end()) {
        throw ConfigError(std::string(key), "unknown configuration key '" + std::string(key) + "'");
    }
    it->second.set(cfg, detail::trim(value));
}

inline std::string get_config_field(const ScenarioConfig& cfg, std::string_view key) {
    const auto& table = detail::field_table();
    const auto it = table.find(key);
    if (it == table.end()) {
        throw ConfigError(std::string(key), "unknown configuration key '" + std::string(key) + "'");
    }
    return it->second.get(cfg);
}

/**
 * Applies a flat `key = value` document on top of `cfg`. Blank lines and
 * lines starting with '#' are ignored; `key: value` is accepted too.
 */
inline void apply_config_text(ScenarioConfig& cfg, std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto sep = text.find_first_of("=:");
        if (sep == std::string::npos) {
            throw ConfigError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        set_config_field(cfg, detail::trim(text.substr(0, sep)), text.substr(sep + 1));
    }
}

inline ScenarioConfig load_config_file(const std::string& path, ScenarioConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open config file: " + path);
    apply_config_text(base, in);
    return base;
}

/// Applies BYZREP_<KEY> environment overrides (key upper-cased).
inline void apply_env_overrides(ScenarioConfig& cfg) {
    for (const auto& key : config_keys()) {
        std::string var(kEnvPrefix);
        for (char ch : key) var.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
        if (const char* v = std::getenv(var.c_str())) set_config_field(cfg, key, v);
    }
}

inline std::string to_config_text(const ScenarioConfig& cfg) {
    std::string out;
    for (const auto& key : config_keys()) {
        out += key + " = " + get_config_field(cfg, key) + "\n";
    }
    return out;
}

}  // namespace byzrep
