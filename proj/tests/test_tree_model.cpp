#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <gtest/gtest.h>

#include "treespec/quadrature.hpp"
#include "treespec/tree_model.hpp"

using namespace treespec;

TEST(TreeModel, RejectsDegreeBelowTwo) {
    EXPECT_THROW(TreeModel(1), std::invalid_argument);
    EXPECT_THROW(TreeModel(0), std::invalid_argument);
}

TEST(TreeModel, SpectralRadiusSquaredIsFourTimesDegreeMinusOne) {
    for (int d = 2; d <= 8; ++d) {
        const TreeModel model(d);
        const double r = model.spectral_radius();
        EXPECT_NEAR(r * r, 4.0 * (d - 1), 1e-12 * 4.0 * (d - 1));
    }
}

TEST(KestenMcKayDensity, KnownValues) {
    // outside the support
    EXPECT_EQ(kesten_mckay_density(TreeModel(3), 3.0), 0.0);
    EXPECT_EQ(kesten_mckay_density(TreeModel(3), -5.0), 0.0);
    // at the center: sqrt(2)/(3 pi) for d = 3, 1/(2 pi) for d = 2
    EXPECT_NEAR(kesten_mckay_density(TreeModel(3), 0.0), 0.1500527193595177, 1e-15);
    EXPECT_NEAR(kesten_mckay_density(TreeModel(2), 0.0), 0.15915494309189535, 1e-15);
}

TEST(KestenMcKayDensity, NonnegativeAndExactlySymmetric) {
    for (int d = 2; d <= 6; ++d) {
        const TreeModel model(d);
        for (int i = -50; i <= 50; ++i) {
            const double t = 0.07 * i;
            const double h = kesten_mckay_density(model, t);
            EXPECT_GE(h, 0.0);
            EXPECT_EQ(h, kesten_mckay_density(model, -t));
        }
    }
}

TEST(ClosedWalkCount, HandCheckedValues) {
    const TreeModel t3(3);
    EXPECT_EQ(closed_walk_count(t3, 0), 1u);
    EXPECT_EQ(closed_walk_count(t3, 1), 0u);
    EXPECT_EQ(closed_walk_count(t3, 2), 3u);
    EXPECT_EQ(closed_walk_count(t3, 3), 0u);
    EXPECT_EQ(closed_walk_count(t3, 4), 15u);
    EXPECT_EQ(closed_walk_count(t3, 6), 87u);
    EXPECT_EQ(closed_walk_count(TreeModel(2), 2), 2u);
    EXPECT_EQ(closed_walk_count(TreeModel(2), 4), 6u); // central binomial
}

TEST(ClosedWalkCount, OddZeroEvenPositiveMonotoneInDegree) {
    for (int k = 1; k <= 20; k += 2) {
        EXPECT_EQ(closed_walk_count(TreeModel(4), k), 0u);
    }
    for (int k = 2; k <= 20; k += 2) {
        std::uint64_t prev = 0;
        for (int d = 2; d <= 6; ++d) {
            const std::uint64_t c = closed_walk_count(TreeModel(d), k);
            EXPECT_GT(c, 0u);
            EXPECT_GE(c, prev);
            prev = c;
        }
    }
}

TEST(ClosedWalkCount, OverflowIsDetected) {
    EXPECT_THROW(closed_walk_count(TreeModel(6), 600), std::overflow_error);
    try {
        closed_walk_count(TreeModel(6), 600);
        FAIL();
    } catch (const std::overflow_error& e) {
        EXPECT_NE(std::string(e.what()).find("600"), std::string::npos);
    }
}

TEST(WalkEndpointCounts, SumsToTotalWalkCount) {
    // total number of length-k walks from the root is d^k
    const TreeModel model(3);
    for (int k = 0; k <= 12; ++k) {
        const auto counts = walk_endpoint_counts(model, k);
        std::uint64_t total = 0, power = 1;
        for (auto c : counts) total += c;
        for (int i = 0; i < k; ++i) power *= 3;
        EXPECT_EQ(total, power);
    }
}

TEST(BuildQuadrature, RejectsTinyRules) {
    EXPECT_THROW(build_quadrature(TreeModel(3), 1), std::invalid_argument);
    EXPECT_THROW(build_quadrature(TreeModel(3), -4), std::invalid_argument);
}

TEST(BuildQuadrature, WeightsSumToOneNodesIncreasing) {
    for (int d : {2, 3, 5}) {
        for (int n : {64, 513, 4096}) {
            const QuadratureRule rule = build_quadrature(TreeModel(d), n);
            double mass = 0.0;
            for (double w : rule.weights) {
                EXPECT_GT(w, 0.0);
                mass += w;
            }
            EXPECT_NEAR(mass, 1.0, 1e-12);
            const double radius = TreeModel(d).spectral_radius();
            for (std::size_t i = 0; i < rule.size(); ++i) {
                EXPECT_LE(std::abs(rule.nodes[i]), radius);
                if (i > 0) EXPECT_LT(rule.nodes[i - 1], rule.nodes[i]);
            }
        }
    }
}

TEST(BuildQuadrature, MomentsMatchWalkCounts) {
    // the walk-count DP is the oracle for every moment of nu
    for (int d = 2; d <= 6; ++d) {
        const TreeModel model(d);
        const QuadratureRule rule = build_quadrature(model);
        for (int k = 0; k <= 20; ++k) {
            const double q = integrate(rule, [&](double t) {
                double p = 1.0;
                for (int i = 0; i < k; ++i) p *= t;
                return p;
            });
            const double exact = double(closed_walk_count(model, k));
            EXPECT_NEAR(q, exact, 1e-8 * std::max(1.0, exact))
                << "d=" << d << " k=" << k;
        }
    }
}

TEST(Integrate, ConstantOddAndGreenExamples) {
    const QuadratureRule rule = build_quadrature(TreeModel(3));
    EXPECT_NEAR(integrate(rule, [](double) { return 1.0; }), 1.0, 1e-13);
    // nu is symmetric; the symmetric pair summation cancels odd integrands exactly
    EXPECT_EQ(integrate(rule, [](double t) { return t; }), 0.0);
    EXPECT_NEAR(integrate(rule, [](double t) { return 3.0 / (3.0 - t); }), 2.0, 1e-10);
}

TEST(Integrate, ReportsNonFiniteIntegrand) {
    const QuadratureRule rule = build_quadrature(TreeModel(3), 64);
    EXPECT_THROW(integrate(rule, [](double t) { return 1.0 / (t - t); }), std::runtime_error);
}
