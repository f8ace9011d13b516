#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spikeflow/plasticity.hpp"

using namespace spikeflow;

TEST(Normalize, Examples) {
    std::vector<double> x{2, 1, 0};
    normalize_traces(x);
    EXPECT_EQ(x, (std::vector<double>{1, 0.5, 0}));
    std::vector<double> z(4, 0.0);
    normalize_traces(z);
    EXPECT_EQ(z, std::vector<double>(4, 0.0));
    for (double c : {1e-9, 0.3, 7.0}) {
        std::vector<double> e{c, c};
        normalize_traces(e);
        EXPECT_EQ(e, (std::vector<double>{1, 1}));
    }
}

TEST(StdpUpdate, Examples) {
    EXPECT_NEAR(stdp_update(0.5, 1.0, 1e-4, 0.0, 0.5), 1e-4 * (std::exp(1.0) - 1.0), 1e-18);
    EXPECT_NEAR(stdp_update(0.5, 1.0, 1e-4, 0.0, 0.5), 1.71828e-4, 1e-9);
    EXPECT_EQ(stdp_update(0.5, 0.5, 1e-4, 0.0, 0.5), 0.0);
    const double w = equilibrium_weight(0.8, 0.0, 0.5);
    EXPECT_NEAR(stdp_update(w, 0.8, 1e-4, 0.0, 0.5), 0.0, 1e-12);
}

TEST(Equilibrium, Examples) {
    EXPECT_DOUBLE_EQ(equilibrium_weight(0.5, 0.0, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(equilibrium_weight(1.0, 0.0, 0.5), 1.0);
    EXPECT_NEAR(equilibrium_weight(0.0, 0.0, 0.5), 0.0, 1e-15);
    EXPECT_THROW(equilibrium_weight(0.5, 1.0, 0.5), std::invalid_argument);
}

TEST(Equilibrium, StrictlyIncreasingInTrace) {
    for (double a : {-2.0, 0.0, 0.5, 0.95}) {
        double prev = -1e300;
        for (int i = 0; i <= 100; ++i) {
            const double w = equilibrium_weight(i / 100.0, a, 0.5);
            ASSERT_GT(w, prev) << "a=" << a << " x=" << i / 100.0;
            prev = w;
        }
    }
}

// Independent fixed-point oracle: bisection on the sign of the update.
TEST(Equilibrium, MatchesBisectionRoot) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> xs(0, 1), as(-1, 0.9), ws(-1, 1);
    for (int n = 0; n < 50; ++n) {
        const double x = xs(rng), a = as(rng), w0 = ws(rng);
        double lo = -20, hi = 20;
        for (int k = 0; k < 200; ++k) {
            const double mid = 0.5 * (lo + hi);
            (stdp_update(mid, x, 1.0, a, w0) > 0 ? lo : hi) = mid;
        }
        EXPECT_NEAR(equilibrium_weight(x, a, w0), 0.5 * (lo + hi), 1e-9);
    }
}

TEST(StdpUpdate, GlobalAttractionTowardEquilibrium) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> xs(0, 1), as(-1, 0.9), ws(0, 1), starts(-2, 3);
    for (int n = 0; n < 100; ++n) {
        const double x = xs(rng), a = as(rng), w0 = ws(rng);
        const double target = equilibrium_weight(x, a, w0);
        double w = starts(rng);
        double gap = std::fabs(w - target);
        for (int k = 0; k < 100000 && gap >= 1e-3; ++k) {
            const double dw = stdp_update(w, x, 1e-2, a, w0);
            if (gap > 1e-12) ASSERT_EQ(std::signbit(dw), std::signbit(target - w));
            w += dw;
            const double next = std::fabs(w - target);
            ASSERT_LE(next, gap + 1e-15);
            gap = next;
        }
        EXPECT_LT(gap, 1e-3);
    }
}

TEST(StdpUpdate, AntisymmetricAboutCenter) {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> d(-0.5, 0.5);
    for (int n = 0; n < 200; ++n) {
        const double delta = d(rng), eps = d(rng);
        EXPECT_NEAR(stdp_update(0.5 + delta, 0.5 + eps, 1e-3, 0.0, 0.5),
                    -stdp_update(0.5 - delta, 0.5 - eps, 1e-3, 0.0, 0.5), 1e-15);
    }
}

TEST(ConvergenceMetric, Examples) {
    std::vector<double> a{0.3, 1.0, 0.0};
    EXPECT_EQ(convergence_metric(a, a), 0.0);
    EXPECT_EQ(convergence_metric(std::vector<double>(5, 1.0), std::vector<double>(5, 0.0)), 1.0);
    EXPECT_DOUBLE_EQ(convergence_metric(std::vector<double>{1, 0}, std::vector<double>{0.5, 0.5}), 0.25);
    EXPECT_THROW(convergence_metric(std::vector<double>{1}, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(ConvergenceMetric, BoundedAndZeroOnlyOnMatch) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0, 1);
    for (int n = 0; n < 500; ++n) {
        std::vector<double> x(9), w(9);
        for (auto& v : x) v = u(rng);
        for (auto& v : w) v = u(rng);
        normalize_traces(x);
        normalize_traces(w);
        const double l = convergence_metric(x, w);
        EXPECT_GE(l, 0.0);
        EXPECT_LE(l, 1.0);
        EXPECT_GT(l, 0.0);
        EXPECT_EQ(convergence_metric(x, x), 0.0);
    }
}

TEST(ComparisonRules, Examples) {
    StdpParams p;
    p.eta = 1e-4;
    for (double w : {0.0, 1.0})
        for (bool pot : {true, false}) EXPECT_EQ(comparison_update(RuleKind::Kheradpisheh, w, pot, p), 0.0);
    EXPECT_DOUBLE_EQ(comparison_update(RuleKind::Kheradpisheh, 0.5, true, p), 2.5e-5);
    EXPECT_DOUBLE_EQ(comparison_update(RuleKind::Kheradpisheh, 0.5, false, p), -2.5e-5);
    EXPECT_DOUBLE_EQ(comparison_update(RuleKind::Shrestha, p.w_init, true, p), 1e-4);
    EXPECT_DOUBLE_EQ(comparison_update(RuleKind::Shrestha, p.w_init, false, p), -1e-4);
    EXPECT_THROW(comparison_update(RuleKind::Ours, 0.5, true, p), std::invalid_argument);
}

TEST(ComparisonRules, EligibilityThreshold) {
    EXPECT_TRUE(eligible(0.5));
    EXPECT_TRUE(eligible(1.0));
    EXPECT_FALSE(eligible(0.4999));
    StdpParams p;
    EXPECT_GT(rule_update(RuleKind::Kheradpisheh, 0.3, 0.7, p, 0.5), 0);
    EXPECT_LT(rule_update(RuleKind::Kheradpisheh, 0.3, 0.2, p, 0.5), 0);
    EXPECT_EQ(rule_update(RuleKind::Ours, 0.3, 0.7, p, 0.5), stdp_update(0.3, 0.7, p));
}

// Repeated eligibility-consistent updates: Kheradpisheh saturates at {0, 1},
// Shrestha drifts without bound, ours settles inside the equilibrium band.
TEST(ComparisonRules, LongRunBehaviour) {
    StdpParams p;
    p.eta = 1e-2;
    double kp = 0.5, kd = 0.5, sp = 0.5, sd = 0.5, op = 0.5, od = 0.5;
    double s_prev = 0;
    for (int k = 1; k <= 20000; ++k) {
        kp += rule_update(RuleKind::Kheradpisheh, kp, 1.0, p, 0.5);
        kd += rule_update(RuleKind::Kheradpisheh, kd, 0.0, p, 0.5);
        sp += rule_update(RuleKind::Shrestha, sp, 1.0, p, 0.5);
        sd += rule_update(RuleKind::Shrestha, sd, 0.0, p, 0.5);
        op += rule_update(RuleKind::Ours, op, 1.0, p, 0.5);
        od += rule_update(RuleKind::Ours, od, 0.0, p, 0.5);
        const double dev = std::max(std::fabs(sp - 0.5), std::fabs(sd - 0.5));
        ASSERT_GT(dev, s_prev);
        s_prev = dev;
        ASSERT_GE(op, 0.0);
        ASSERT_LE(op, 1.0 + 1e-12);
        ASSERT_GE(od, -1e-12);
        ASSERT_LE(od, 1.0);
    }
    EXPECT_GT(kp, 0.95);
    EXPECT_LT(kd, 0.05);
    EXPECT_GT(sp, 2.5);
    EXPECT_LT(sd, -1.5);
    EXPECT_NEAR(op, 1.0, 1e-3);
    EXPECT_NEAR(od, 0.0, 1e-3);
}

TEST(StdpParams, Validation) {
    StdpParams p;
    EXPECT_NO_THROW(p.check());
    p.eta = 0;
    EXPECT_THROW(p.check(), std::invalid_argument);
    p = {};
    p.a = 1;
    EXPECT_THROW(p.check(), std::invalid_argument);
    EXPECT_EQ(parse_rule("shrestha"), RuleKind::Shrestha);
    EXPECT_THROW(parse_rule("hebb"), std::invalid_argument);
    EXPECT_STREQ(rule_name(RuleKind::Kheradpisheh), "kheradpisheh");
}
