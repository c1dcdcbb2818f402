#include <gtest/gtest.h>

#include <cmath>

#include "byzrep/analysis.hpp"
#include "byzrep/sim.hpp"
#include "oracles.hpp"

using namespace byzrep;
using namespace byzrep::analysis;

TEST(Coefficients, NoFlippingNeverMismatches) {
    const auto f = mms_coefficients(0.0, 0.0);
    for (const auto* c : {&f.bb, &f.hb, &f.bh, &f.hh}) {
        EXPECT_DOUBLE_EQ((*c)[0], 1.0);
        EXPECT_DOUBLE_EQ((*c)[1] + (*c)[2] + (*c)[3], 0.0);
    }
}

TEST(Coefficients, DeterministicDoubleFlipStaysConsistent) {
    const auto f = mms_coefficients(1.0, 0.0);
    EXPECT_DOUBLE_EQ(f.bb[0], 1.0);
    EXPECT_DOUBLE_EQ(f.bh[0], 1.0);
}

TEST(Coefficients, HalfFlipValues) {
    const auto f = mms_coefficients(0.5, 0.0);
    EXPECT_DOUBLE_EQ(f.bb[0], 0.25);
    EXPECT_DOUBLE_EQ(f.bh[0], 0.5);
}

TEST(Coefficients, MatchEnumerationAndSumToOne) {
    Rng rng(1);
    for (int rep = 0; rep < 200; ++rep) {
        const double p1 = uniform01(rng), p2 = uniform01(rng);
        const auto f = mms_coefficients(p1, p2);
        const std::array<const std::array<double, 4>*, 4> by_roles{&f.hh, &f.hb, &f.bh, &f.bb};
        for (int ri = 0; ri < 2; ++ri) {
            for (int rj = 0; rj < 2; ++rj) {
                const auto& c = *by_roles[ri * 2 + rj];
                double sum = 0.0;
                for (int m = 0; m < 4; ++m) {
                    EXPECT_NEAR(c[m], oracle::case_given_roles(p1, p2, ri, rj, m), 1e-14);
                    sum += c[m];
                }
                EXPECT_NEAR(sum, 1.0, 1e-14);
            }
        }
    }
}

TEST(Coefficients, SymmetricUnderFlipProbabilityReflection) {
    Rng rng(2);
    for (int rep = 0; rep < 200; ++rep) {
        const double p1 = uniform01(rng), p2 = uniform01(rng);
        const auto a = mms_coefficients(p1, p2);
        const auto b = mms_coefficients(1.0 - p1, p2);
        EXPECT_NEAR(a.bb[0], b.bb[0], 1e-14);
        EXPECT_NEAR(a.bh[0], b.bh[0], 1e-14);
        EXPECT_NEAR(a.hb[1], b.hb[1], 1e-14);
        EXPECT_NEAR(a.bh[3], b.bh[3], 1e-14);
    }
}

TEST(AlphaMms, NoByzantines) {
    const auto a = alpha_mms(0.0, 0.4, 0.3);
    for (const auto& x : a.alpha) {
        if (x) {
            EXPECT_EQ(*x, 0.0);
        }
    }
}

TEST(AlphaMms, HandExample) {
    EXPECT_NEAR(alpha_mms(0.5, 0.5, 0.0).at(1), 1.0 / 3.0, 1e-15);
}

TEST(AlphaMms, ImpossibleCaseThrows) {
    const auto a = alpha_mms(0.3, 0.0, 0.0);
    EXPECT_THROW((void)a.at(2), std::domain_error);
    EXPECT_THROW((void)a.at(5), std::out_of_range);
}

TEST(AlphaMms, MatchesEnumerationOracle) {
    Rng rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        const double a0 = uniform01(rng), p1 = uniform01(rng), p2 = uniform01(rng);
        const auto got = alpha_mms(a0, p1, p2);
        const auto want = oracle::alpha_by_case(a0, p1, p2);
        for (int m = 0; m < 4; ++m) {
            if (std::isnan(want[m])) {
                EXPECT_FALSE(got.alpha[m]);
                continue;
            }
            ASSERT_TRUE(got.alpha[m]);
            EXPECT_NEAR(*got.alpha[m], want[m], 1e-12);
        }
    }
}

TEST(AlphaMms, MonteCarloConditionalFrequency) {
    const double a0 = 0.35, p1 = 0.5, p2 = 0.5;
    const int n = 1000000;
    Rng rng(4);
    std::array<std::vector<SensorState>, 4> pairs;
    for (int ri = 0; ri < 2; ++ri) {
        for (int rj = 0; rj < 2; ++rj) {
            auto& p = pairs[ri * 2 + rj];
            p.resize(2);
            p[0] = {0, ri ? Role::Byzantine : Role::Honest, 1, BitWindow(1), BitWindow(1)};
            p[1] = {1, rj ? Role::Byzantine : Role::Honest, 0, BitWindow(1), BitWindow(1)};
        }
    }
    int case1 = 0, case1_byz = 0;
    const BitVector v{0, 0};
    for (int t = 0; t < n; ++t) {
        const int ri = bernoulli(rng, a0), rj = bernoulli(rng, a0);
        const auto ex = corrupt_and_exchange(v, pairs[ri * 2 + rj], p1, p2, rng);
        if (ex.u[0] == ex.z[0] && ex.u[1] == ex.z[1]) {
            ++case1;
            case1_byz += ri;
        }
    }
    const double expected = alpha_mms(a0, p1, p2).at(1);
    const double se = std::sqrt(expected * (1 - expected) / case1);
    EXPECT_NEAR(case1_byz / double(case1), expected, 3 * se);
}

TEST(AlphaSets, Values) {
    const auto none = alpha_sets(0.0, 0.3, 0.7);
    EXPECT_EQ(none.under, 0.0);
    EXPECT_EQ(none.over, 0.0);
    EXPECT_EQ(none.p_under, 1.0);
    EXPECT_EQ(none.p_over, 0.0);
    const auto s = alpha_sets(0.5, 0.5, 0.0);
    EXPECT_NEAR(s.under, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(s.under * s.p_under + s.over * s.p_over, 0.5, 1e-15);
    EXPECT_NEAR(s.over, alpha_over_from_cases(0.5, 0.5, 0.0), 1e-14);
}

TEST(AlphaSets, TotalProbability) {
    Rng rng(5);
    for (int rep = 0; rep < 1000; ++rep) {
        const double a0 = uniform01(rng), p1 = uniform01(rng), p2 = uniform01(rng);
        const auto s = alpha_sets(a0, p1, p2);
        EXPECT_NEAR(s.under * s.p_under + s.over * s.p_over, a0, 1e-12);
        EXPECT_NEAR(s.over, alpha_over_from_cases(a0, p1, p2), 1e-12);
    }
}

TEST(AlphaSets, LowerSetIsCleanerUpToPointEight) {
    for (int ia = 1; ia <= 8; ++ia) {
        const double a0 = ia / 10.0;
        for (int i = 0; i <= 50; ++i) {
            for (int j = 0; j <= 50; ++j) {
                const auto s = alpha_sets(a0, i / 50.0, j / 50.0);
                ASSERT_LE(s.under, a0 + 1e-12);
                if (s.p_over > 0) {
                    ASSERT_GE(s.over, a0 - 1e-12);
                }
            }
        }
    }
}

TEST(AlphaSets, StationaryAtHalfFlip) {
    for (int j = 0; j <= 20; ++j) {
        const double p2 = j / 20.0;
        for (double a0 : {0.2, 0.5, 0.8}) {
            const double h = 1e-6;
            const double d = (alpha_sets(a0, 0.5 + h, p2).under - alpha_sets(a0, 0.5 - h, p2).under) / (2 * h);
            EXPECT_NEAR(d, 0.0, 1e-8);
        }
    }
}

TEST(Kld, NonNegativeAndZeroOnlyOnDiagonal) {
    Rng rng(6);
    for (int rep = 0; rep < 5000; ++rep) {
        const double p = uniform01(rng), q = uniform01(rng);
        EXPECT_GE(bernoulli_kld(p, q), 0.0);
        EXPECT_GE(bernoulli_kld(p, q, 2.0), 0.0);
    }
    EXPECT_EQ(bernoulli_kld(0.3, 0.3), 0.0);
    EXPECT_NEAR(bernoulli_kld(0.5, 0.25, 2.0), 0.5 * std::log2(2.0) + 0.5 * std::log2(0.5 / 0.75), 1e-15);
}

TEST(Blinding, HonestNetworkIsNotBlind) {
    const auto b = blinding_check(0.0, 0.7, 0.2, 0.9, 0.1);
    EXPECT_DOUBLE_EQ(b.under.pi11, 0.9);
    EXPECT_GT(b.kld_under, 0.0);
    EXPECT_FALSE(b.blind);
}

TEST(Blinding, LocusGivesZeroDivergence) {
    for (double p1 : {0.55, 0.7, 0.85, 1.0}) {
        for (double p2 : {0.0, 0.3, 0.9}) {
            const double a0 = solve_blinding_alpha0(p1, p2);
            const auto s = alpha_sets(a0, p1, p2);
            EXPECT_NEAR(s.under * p1, 0.5, 1e-14);
            const auto b = blinding_check(a0, p1, p2, 0.9, 0.1);
            EXPECT_LT(b.kld_under, kBlindTolerance);
            EXPECT_NEAR(b.under.pi11, 0.5, 1e-14);
            EXPECT_NEAR(b.under.pi10, 0.5, 1e-14);
        }
    }
    EXPECT_THROW((void)solve_blinding_alpha0(0.5, 0.1), std::domain_error);
}

TEST(Blinding, OptimalAttackApproachesJointBlindness) {
    double best = 1e300, best_p1 = 0, best_p2 = 1;
    for (int i = 0; i <= 100; ++i) {
        for (int j = 0; j <= 100; ++j) {
            const auto b = blinding_check(0.5, i / 100.0, j / 100.0, 0.9, 0.1);
            const double worst = std::max(b.kld_under, b.kld_over);
            if (worst < best) best = worst, best_p1 = i / 100.0, best_p2 = j / 100.0;
        }
    }
    EXPECT_DOUBLE_EQ(best_p1, 1.0);
    EXPECT_DOUBLE_EQ(best_p2, 0.0);
    EXPECT_LT(best, 1e-12);
}

TEST(ClusteringDeception, Values) {
    const auto c = clustering_deception(0.5, 0.9, 0.1, 0.5);
    EXPECT_NEAR(c.p_hh_diff, 0.18, 1e-15);
    EXPECT_NEAR(c.p_bh_diff, 0.5, 1e-15);
    EXPECT_GT(c.kld, 0.0);
    EXPECT_EQ(clustering_deception(0.0, 0.9, 0.1, 0.5).kld, 0.0);
    for (double p1 : {0.1, 0.6, 1.0}) {
        EXPECT_NEAR(clustering_deception(p1, 0.5, 0.5, 0.5).kld, 0.0, 1e-15);
    }
}

TEST(LowerSetShift, DegeneratePopulations) {
    Rng rng(7);
    for (int rep = 0; rep < 100; ++rep) {
        const double p1 = uniform01(rng), p2 = uniform01(rng);
        EXPECT_EQ(lower_set_shift(0.0, p1, p2).h, 0.0);
        EXPECT_EQ(lower_set_shift(1.0, p1, p2).h, 0.0);
    }
}

TEST(LowerSetShift, AgreesWithDirectDifference) {
    Rng rng(8);
    for (int rep = 0; rep < 1000; ++rep) {
        const double a0 = uniform01(rng), p1 = uniform01(rng), p2 = uniform01(rng);
        EXPECT_NEAR(lower_set_shift(a0, p1, p2).h, alpha_sets(a0, p1, p2).under - a0, 1e-12);
    }
}

TEST(LowerSetShift, SurfaceNonPositiveAtPointEight) {
    for (int i = 0; i <= 100; ++i) {
        for (int j = 0; j <= 100; ++j) {
            ASSERT_LE(lower_set_shift(0.8, i / 100.0, j / 100.0).h, 1e-9) << i << "," << j;
        }
    }
    EXPECT_DOUBLE_EQ(p2_max(0.8), 1.0);
    EXPECT_DOUBLE_EQ(p2_max(0.3), 1.0);
    EXPECT_LT(p2_max(0.9), 1.0);
    EXPECT_GT(lower_set_shift(0.9, 0.5, 1.0).h, 0.0);
}

TEST(TheoryPoint, FieldsAreOrderedAndConsistent) {
    const auto t = theory_point(0.5, 0.5, 0.0, 0.9, 0.1, 0.5);
    const auto f = fields(t);
    EXPECT_EQ(f.front().first, "alpha0");
    EXPECT_EQ(f.back().first, "p2_max");
    EXPECT_NEAR(t.alpha_under, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(t.h, 1.0 / 3.0 - 0.5, 1e-15);
}
