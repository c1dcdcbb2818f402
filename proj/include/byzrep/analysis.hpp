#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

namespace byzrep::analysis {

/**
 * Per-round MMS outcome probabilities for a group (i, j), by role pair.
 *
 * Index m - 1 for the four cases
 *   1: u_i = z_i, u_j = z_j      2: u_i != z_i, u_j = z_j
 *   3: u_i = z_i, u_j != z_j     4: u_i != z_i, u_j != z_j
 * bb: both Byzantine; hb: i honest, j Byzantine; bh: i Byzantine, j honest;
 * hh: both honest.
 */
struct MmsCoefficients {
    std::array<double, 4> bb{};
    std::array<double, 4> hb{};
    std::array<double, 4> bh{};
    std::array<double, 4> hh{};
};

inline MmsCoefficients mms_coefficients(double p1, double p2) {
    // Byzantine's own u and w agree: both or neither flipped.
    const double same = 1.0 - 2.0 * p1 + 2.0 * p1 * p1;
    const double diff = 2.0 * p1 * (1.0 - p1);
    // Byzantine sensor matches when its partner is also Byzantine (relay flips with p2).
    const double s = diff * p2 + same * (1.0 - p2);
    const double s_bar = diff * (1.0 - p2) + same * p2;

    MmsCoefficients f;
    f.bb = {s * s, s * s_bar, s_bar * s, s_bar * s_bar};
    f.hb = {(1.0 - p2) * same, p2 * same, (1.0 - p2) * diff, p2 * diff};
    f.bh = {same * (1.0 - p2), diff * (1.0 - p2), same * p2, diff * p2};
    f.hh = {1.0, 0.0, 0.0, 0.0};
    return f;
}

/// P(i = B | case m) for the four MMS cases, with the probability of each case.
struct AlphaMms {
    std::array<std::optional<double>, 4> alpha;  ///< nullopt when the case has probability 0
    std::array<double, 4> event_probability{};

    /// alpha_m for m in 1..4; throws when the conditioning event is impossible.
    [[nodiscard]] double at(int m) const {
        if (m < 1 || m > 4) throw std::out_of_range("alpha index must be 1..4");
        if (!alpha[m - 1]) throw std::domain_error("conditioning event impossible");
        return *alpha[m - 1];
    }
};

inline AlphaMms alpha_mms(double alpha0, double p1, double p2) {
    const auto f = mms_coefficients(p1, p2);
    const double bb = alpha0 * alpha0;
    const double mixed = alpha0 * (1.0 - alpha0);
    const double hh = (1.0 - alpha0) * (1.0 - alpha0);
    AlphaMms out;
    for (std::size_t m = 0; m < 4; ++m) {
        const double num = bb * f.bb[m] + mixed * f.bh[m];
        const double den = bb * f.bb[m] + mixed * (f.hb[m] + f.bh[m]) + hh * f.hh[m];
        out.event_probability[m] = den;
        if (den > 0.0) out.alpha[m] = num / den;
    }
    return out;
}

struct AlphaSets {
    double under = 0.0;    ///< P(B | lower set)
    double over = 0.0;     ///< P(B | upper set)
    double p_under = 0.0;  ///< P(a group is in the lower set)
    double p_over = 0.0;
};

/**
 * Byzantine fraction in each macro set when membership needs `window`
 * consecutive all-match rounds. Rounds are independent given the roles, so
 * the per-round coefficients are raised to the window length; window = 1 is
 * the single-round form. An empty set (probability 0) reports alpha0.
 */
inline AlphaSets alpha_sets(double alpha0, double p1, double p2, std::size_t window = 1) {
    const auto f = mms_coefficients(p1, p2);
    const double w = static_cast<double>(window);
    const double f1 = std::pow(f.bb[0], w);
    const double f2 = std::pow(f.bh[0], w);
    const double num = alpha0 * alpha0 * f1 + alpha0 * (1.0 - alpha0) * f2;
    const double den =
        alpha0 * alpha0 * f1 + 2.0 * alpha0 * (1.0 - alpha0) * f2 + (1.0 - alpha0) * (1.0 - alpha0);

    AlphaSets s;
    s.p_under = den;
    s.p_over = 1.0 - den;
    s.under = den > 0.0 ? num / den : alpha0;
    s.over = s.p_over > 0.0 ? (alpha0 - num) / s.p_over : alpha0;
    return s;
}

/// Upper-set fraction from the three mismatch cases: sum_m alpha_m P_m / P(upper).
inline double alpha_over_from_cases(double alpha0, double p1, double p2) {
    const auto a = alpha_mms(alpha0, p1, p2);
    double num = 0.0, den = 0.0;
    for (std::size_t m = 1; m < 4; ++m) {
        if (!a.alpha[m]) continue;
        num += *a.alpha[m] * a.event_probability[m];
        den += a.event_probability[m];
    }
    return den > 0.0 ? num / den : alpha0;
}

namespace detail {

/// a * log(a / b) with 0 log 0 = 0.
inline double xlog_ratio(double a, double b, double log_base) {
    if (a <= 0.0) return 0.0;
    if (b <= 0.0) return std::numeric_limits<double>::infinity();
    return a * std::log(a / b) / log_base;
}

}  // namespace detail

/// D(Bern(p) || Bern(q)); natural log unless another base is given.
inline double bernoulli_kld(double p, double q, double base = std::exp(1.0)) {
    const double lb = std::log(base);
    return detail::xlog_ratio(p, q, lb) + detail::xlog_ratio(1.0 - p, 1.0 - q, lb);
}

/// Detection / false-alarm probabilities seen at the FC for a set with Byzantine fraction `alpha`.
struct SetPis {
    double pi11 = 0.0, pi10 = 0.0, pi01 = 0.0, pi00 = 0.0;
};

inline SetPis set_pis(double alpha, double p1, double p_d, double p_f) {
    const double flip = alpha * p1;
    SetPis s;
    s.pi11 = p_d * (1.0 - flip) + flip * (1.0 - p_d);
    s.pi10 = p_f * (1.0 - flip) + flip * (1.0 - p_f);
    s.pi01 = 1.0 - s.pi11;
    s.pi00 = 1.0 - s.pi10;
    return s;
}

inline constexpr double kBlindTolerance = 1e-12;

struct BlindingCheck {
    SetPis under;
    SetPis over;
    double kld_under = 0.0;
    double kld_over = 0.0;
    bool blind = false;
};

/// KLDs between the H1 and H0 report distributions of each macro set.
inline BlindingCheck blinding_check(double alpha0, double p1, double p2, double p_d, double p_f,
                                    std::size_t window = 1) {
    const auto sets = alpha_sets(alpha0, p1, p2, window);
    BlindingCheck b;
    b.under = set_pis(sets.under, p1, p_d, p_f);
    b.over = set_pis(sets.over, p1, p_d, p_f);
    b.kld_under = bernoulli_kld(b.under.pi11, b.under.pi10);
    b.kld_over = bernoulli_kld(b.over.pi11, b.over.pi10);
    b.blind = b.kld_under < kBlindTolerance && b.kld_over < kBlindTolerance;
    return b;
}

/**
 * alpha0 at which the lower-set flip rate alpha_under * p1 equals 1/2.
 * Requires p1 > 1/2 (below that the locus is unreachable).
 */
inline double solve_blinding_alpha0(double p1, double p2) {
    if (!(p1 > 0.5 && p1 <= 1.0)) throw std::domain_error("blinding locus requires p1 in (1/2, 1]");
    auto g = [&](double a0) { return alpha_sets(a0, p1, p2).under * p1 - 0.5; };
    if (g(1.0) < 0.0) throw std::domain_error("blinding locus unreachable for these p1, p2");
    std::uintmax_t iters = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(
        g, 0.0, 1.0, -0.5, g(1.0), boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (lo + hi);
}

struct ClusteringDeception {
    double kappa10 = 0.0;  ///< Byzantine P(u = 1 | H0)
    double kappa11 = 0.0;  ///< Byzantine P(u = 1 | H1)
    double p_hh_diff = 0.0;
    double p_bh_diff = 0.0;
    double kld = 0.0;      ///< D(Bern(P_HH) || Bern(P_BH)) in bits
};

inline ClusteringDeception clustering_deception(double p1, double p_d, double p_f, double prior_h1) {
    const double pi1 = prior_h1;
    const double pi0 = 1.0 - prior_h1;
    ClusteringDeception c;
    c.kappa10 = (1.0 - p_f) * p1 + p_f * (1.0 - p1);
    c.kappa11 = (1.0 - p_d) * p1 + p_d * (1.0 - p1);
    const double kappa00 = 1.0 - c.kappa10;
    const double kappa01 = 1.0 - c.kappa11;
    c.p_hh_diff = 2.0 * pi0 * p_f * (1.0 - p_f) + 2.0 * pi1 * p_d * (1.0 - p_d);
    c.p_bh_diff = pi0 * (c.kappa10 * (1.0 - p_f) + kappa00 * p_f) +
                  pi1 * (c.kappa11 * (1.0 - p_d) + kappa01 * p_d);
    c.kld = bernoulli_kld(c.p_hh_diff, c.p_bh_diff, 2.0);
    return c;
}

struct LowerSetShift {
    double h = 0.0;  ///< alpha_under - alpha0
    int sign = 0;
};

/**
 * h = alpha_under - alpha0 for the single-round sets, in the cancellation-free
 * form alpha0 (1 - alpha0) [-(alpha0 (1 - f1) + (1 - 2 alpha0)(1 - f2))] / P(lower).
 */
inline LowerSetShift lower_set_shift(double alpha0, double p1, double p2) {
    const auto f = mms_coefficients(p1, p2);
    const double same = 1.0 - 2.0 * p1 + 2.0 * p1 * p1;
    const double diff = 2.0 * p1 * (1.0 - p1);
    const double s = diff * p2 + same * (1.0 - p2);
    const double s_bar = diff * (1.0 - p2) + same * p2;
    const double one_minus_f1 = s_bar * (1.0 + s);
    const double one_minus_f2 = diff + p2 * same;
    const double bracket = -(alpha0 * one_minus_f1 + (1.0 - 2.0 * alpha0) * one_minus_f2);
    const double den = alpha0 * alpha0 * f.bb[0] + 2.0 * alpha0 * (1.0 - alpha0) * f.bh[0] +
                       (1.0 - alpha0) * (1.0 - alpha0);
    LowerSetShift out;
    out.h = den > 0.0 ? alpha0 * (1.0 - alpha0) * bracket / den : 0.0;
    out.sign = (out.h > 0.0) - (out.h < 0.0);
    return out;
}

/// Largest p2 keeping h <= 0 at p1 = 1/2 when alpha0 > 1/2; 1 otherwise.
inline double p2_max(double alpha0) {
    if (alpha0 <= 0.5) return 1.0;
    return std::min((alpha0 - 2.0) / (2.0 * (1.0 - 2.0 * alpha0)), 1.0);
}

/// Every closed-form quantity at one parameter point.
struct TheoryPoint {
    double alpha0 = 0.0, p1 = 0.0, p2 = 0.0, p_d = 0.9, p_f = 0.1, prior_h1 = 0.5;
    std::array<double, 4> alpha_mms{};  ///< NaN where the case is impossible
    double alpha_under = 0.0, alpha_over = 0.0, p_under = 0.0, p_over = 0.0;
    SetPis pi_under, pi_over;
    double kld_under = 0.0, kld_over = 0.0;
    double p_hh_diff = 0.0, p_bh_diff = 0.0, kld_cluster = 0.0;
    double h = 0.0, p2_max = 1.0;
};

inline TheoryPoint theory_point(double alpha0, double p1, double p2, double p_d, double p_f,
                                double prior_h1, std::size_t window = 1) {
    TheoryPoint t;
    t.alpha0 = alpha0;
    t.p1 = p1;
    t.p2 = p2;
    t.p_d = p_d;
    t.p_f = p_f;
    t.prior_h1 = prior_h1;
    const auto am = alpha_mms(alpha0, p1, p2);
    for (std::size_t m = 0; m < 4; ++m) {
        t.alpha_mms[m] = am.alpha[m].value_or(std::numeric_limits<double>::quiet_NaN());
    }
    const auto sets = alpha_sets(alpha0, p1, p2, window);
    t.alpha_under = sets.under;
    t.alpha_over = sets.over;
    t.p_under = sets.p_under;
    t.p_over = sets.p_over;
    const auto b = blinding_check(alpha0, p1, p2, p_d, p_f, window);
    t.pi_under = b.under;
    t.pi_over = b.over;
    t.kld_under = b.kld_under;
    t.kld_over = b.kld_over;
    const auto cd = clustering_deception(p1, p_d, p_f, prior_h1);
    t.p_hh_diff = cd.p_hh_diff;
    t.p_bh_diff = cd.p_bh_diff;
    t.kld_cluster = cd.kld;
    t.h = window == 1 ? lower_set_shift(alpha0, p1, p2).h : sets.under - alpha0;
    t.p2_max = p2_max(alpha0);
    return t;
}

/// Column name / value pairs for tabular output, in a fixed order.
inline std::vector<std::pair<std::string, double>> fields(const TheoryPoint& t) {
    return {
        {"alpha0", t.alpha0},           {"p1", t.p1},
        {"p2", t.p2},                   {"alpha1", t.alpha_mms[0]},
        {"alpha2", t.alpha_mms[1]},     {"alpha3", t.alpha_mms[2]},
        {"alpha4", t.alpha_mms[3]},     {"alpha_under", t.alpha_under},
        {"alpha_over", t.alpha_over},   {"p_under", t.p_under},
        {"p_over", t.p_over},           {"pi_under_11", t.pi_under.pi11},
        {"pi_under_10", t.pi_under.pi10}, {"pi_under_01", t.pi_under.pi01},
        {"pi_under_00", t.pi_under.pi00}, {"pi_over_11", t.pi_over.pi11},
        {"pi_over_10", t.pi_over.pi10}, {"pi_over_01", t.pi_over.pi01},
        {"pi_over_00", t.pi_over.pi00}, {"kld_under", t.kld_under},
        {"kld_over", t.kld_over},       {"p_hh_diff", t.p_hh_diff},
        {"p_bh_diff", t.p_bh_diff},     {"kld_cluster", t.kld_cluster},
        {"h", t.h},                     {"p2_max", t.p2_max},
    };
}

}  // namespace byzrep::analysis
