#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "treespec/dunau.hpp"
#include "treespec/quadrature.hpp"
#include "treespec/tree_model.hpp"

using namespace treespec;

namespace {

// Exact oracle for r_n(A)delta_o: the vectors are radial, so track one
// integer value per level and apply the adjacency operator level-wise
// ((Av)[0] = d*v[1], (Av)[m] = v[m-1] + (d-1)*v[m+1]). Independent of both
// quadrature and pointwise polynomial evaluation.
std::vector<std::vector<std::int64_t>> radial_sphere_vectors(int d, int max_n, int depth) {
    auto apply = [&](const std::vector<std::int64_t>& v) {
        std::vector<std::int64_t> out(v.size(), 0);
        out[0] = d * v[1];
        for (std::size_t m = 1; m + 1 < v.size(); ++m) {
            out[m] = v[m - 1] + std::int64_t(d - 1) * v[m + 1];
        }
        return out;
    };
    std::vector<std::vector<std::int64_t>> r;
    r.emplace_back(std::size_t(depth) + 2, 0);
    r[0][0] = 1;
    if (max_n >= 1) r.push_back(apply(r[0]));
    for (int n = 2; n <= max_n; ++n) {
        std::vector<std::int64_t> next = apply(r[std::size_t(n) - 1]);
        const std::int64_t coeff = (n == 2) ? d : d - 1;
        for (std::size_t m = 0; m < next.size(); ++m) next[m] -= coeff * r[std::size_t(n) - 2][m];
        r.push_back(std::move(next));
    }
    return r;
}

} // namespace

TEST(DunauEval, RecurrenceBaseCases) {
    const DunauTable table(3, 10);
    for (double t : {-2.0, -0.3, 0.0, 1.5, 2.7}) {
        EXPECT_EQ(dunau_eval(table, 0, t), 1.0);
        EXPECT_EQ(dunau_eval(table, 1, t), t);
    }
    // forced by the sphere-indicator identity: A^2 delta_o = d delta_o + 1_{S_2}
    EXPECT_EQ(dunau_eval(table, 2, 0.0), -3.0);
    EXPECT_EQ(dunau_eval(DunauTable(5, 4), 2, 0.0), -5.0);
}

TEST(DunauEval, RangeChecked) {
    const DunauTable table(3, 5);
    EXPECT_THROW(dunau_eval(table, 6, 0.0), std::invalid_argument);
    EXPECT_THROW(dunau_eval(table, -1, 0.0), std::invalid_argument);
}

TEST(DunauEval, ParityIsExact) {
    std::vector<double> pos(21), neg(21);
    for (double t : {0.13, 1.0, 2.5, 2.82}) {
        dunau_values(3, t, pos);
        dunau_values(3, -t, neg);
        for (int n = 0; n <= 20; ++n) {
            EXPECT_EQ(neg[std::size_t(n)], (n % 2 == 0 ? 1.0 : -1.0) * pos[std::size_t(n)]);
        }
    }
}

TEST(DunauEval, BoundedGrowthInsideSupport) {
    // |r_n(t)| <= max(2, (n+1)(d-1)^{n/2}) on the support; no overflow to n = 64
    for (int d : {3, 4}) {
        const double radius = TreeModel(d).spectral_radius();
        std::vector<double> vals(65);
        for (int i = -40; i <= 40; ++i) {
            const double t = radius * double(i) / 40.5;
            dunau_values(d, t, vals);
            for (int n = 0; n <= 64; ++n) {
                ASSERT_TRUE(std::isfinite(vals[std::size_t(n)]));
                const double bound = std::max(2.0, (n + 1) * std::pow(double(d - 1), n / 2.0));
                EXPECT_LE(std::abs(vals[std::size_t(n)]), bound) << "d=" << d << " n=" << n;
            }
        }
    }
}

TEST(SphereSize, ValuesAndOverflow) {
    EXPECT_EQ(sphere_size(3, 0), 1u);
    EXPECT_EQ(sphere_size(3, 1), 3u);
    EXPECT_EQ(sphere_size(3, 4), 24u);
    EXPECT_EQ(sphere_size(2, 7), 2u);
    EXPECT_EQ(sphere_size(5, 3), 80u);
    EXPECT_THROW(sphere_size(3, 100), std::overflow_error);
    EXPECT_THROW(sphere_size(3, -1), std::invalid_argument);
    EXPECT_EQ(sphere_size_real(3, 4), 24.0);
}

TEST(SphereIndicator, HoldsOnTheTree) {
    EXPECT_TRUE(sphere_indicator_check(3, 0, 2));
    EXPECT_TRUE(sphere_indicator_check(3, 1, 3));
    EXPECT_TRUE(sphere_indicator_check(3, 5, 10));
    EXPECT_TRUE(sphere_indicator_check(4, 3, 7));
    EXPECT_TRUE(sphere_indicator_check(2, 4, 9));
}

TEST(SphereIndicator, InsufficientDepthRejected) {
    EXPECT_THROW(sphere_indicator_check(3, 5, 9), std::invalid_argument);
}

TEST(SphereIndicator, UncorrectedFirstStepFailsTheTreeCheck) {
    // With the alternative first step r_2 = t^2 - (d-1), the vector
    // r_2(A)delta_o equals delta_o + 1_{S_2}, not the sphere indicator.
    const int d = 3;
    const TruncatedTree tree = build_tree(d, 4);
    std::vector<std::int64_t> r0(tree.vertex_count(), 0), r1(tree.vertex_count(), 0);
    r0[0] = 1;
    r1[1] = r1[2] = r1[3] = 1; // A delta_o
    std::vector<std::int64_t> r2(tree.vertex_count(), 0);
    for (std::uint64_t v = 0; v < tree.vertex_count(); ++v) {
        std::int64_t acc = 0;
        if (v != 0) acc += r1[tree.parent(v)];
        const int kids = tree.child_count(v);
        for (int c = 0; c < kids; ++c) acc += r1[tree.first_child(v) + std::uint64_t(c)];
        r2[v] = acc - std::int64_t(d - 1) * r0[v];
    }
    EXPECT_EQ(r2[0], 1); // root residue: not an indicator of S_2
    EXPECT_EQ(r2[tree.level_begin(2)], 1);
}

TEST(DunauInner, DiagonalAndOffDiagonal) {
    const DunauTable table(3, 16);
    const QuadratureRule rule = build_quadrature(TreeModel(3));
    EXPECT_NEAR(dunau_inner(table, rule, 0, 0), 1.0, 1e-12);
    EXPECT_NEAR(dunau_inner(table, rule, 2, 3), 0.0, 1e-8);
    EXPECT_NEAR(dunau_inner(table, rule, 3, 3), 12.0, 1e-8);
}

TEST(DunauInner, OrthogonalityUpTo15) {
    for (int d : {3, 4}) {
        const DunauTable table(d, 15);
        const QuadratureRule rule = build_quadrature(TreeModel(d));
        for (int n = 0; n <= 15; ++n) {
            for (int m = 0; m <= n; ++m) {
                const double v = dunau_inner(table, rule, n, m);
                if (n == m) {
                    const double s = double(sphere_size(d, n));
                    EXPECT_NEAR(v, s, 1e-6 * s) << "d=" << d << " n=" << n;
                } else {
                    EXPECT_NEAR(v, 0.0, 1e-6) << "d=" << d << " n=" << n << " m=" << m;
                }
            }
        }
    }
}

TEST(DunauInner, MatchesExactTreeInnerProducts) {
    // quadrature vs exact integer level-wise computation of <r_n(A)d_o, r_m(A)d_o>
    const int d = 3, top = 15, depth = 34;
    const auto vectors = radial_sphere_vectors(d, top, depth);
    const DunauTable table(d, top);
    const QuadratureRule rule = build_quadrature(TreeModel(d));
    for (int n = 0; n <= top; ++n) {
        for (int m = 0; m <= top; ++m) {
            double exact = 0.0;
            for (int lev = 0; lev <= depth; ++lev) {
                const double prod = double(vectors[std::size_t(n)][std::size_t(lev)]) *
                                    double(vectors[std::size_t(m)][std::size_t(lev)]);
                if (prod != 0.0) exact += prod * sphere_size_real(d, lev);
            }
            EXPECT_NEAR(dunau_inner(table, rule, n, m), exact, 1e-9 * std::max(1.0, exact));
        }
    }
}

TEST(RadialOracle, SphereVectorsAreIndicators) {
    const auto vectors = radial_sphere_vectors(3, 10, 30);
    for (int n = 0; n <= 10; ++n) {
        for (int lev = 0; lev <= 20; ++lev) {
            EXPECT_EQ(vectors[std::size_t(n)][std::size_t(lev)], lev == n ? 1 : 0);
        }
    }
}
