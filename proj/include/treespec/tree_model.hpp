#ifndef TREESPEC_TREE_MODEL_HPP
#define TREESPEC_TREE_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace treespec {

/// The infinite d-regular tree T_d, d >= 2. For d = 2 this is the line Z.
struct TreeModel {
    int degree;

    explicit TreeModel(int d) : degree(d) {
        if (d < 2) {
            throw std::invalid_argument("TreeModel: degree must be >= 2, got " +
                                        std::to_string(d));
        }
    }

    /// Spectral radius of the adjacency operator: 2*sqrt(d-1).
    double spectral_radius() const { return 2.0 * std::sqrt(double(degree - 1)); }
};

/// Density of the Kesten-McKay (Plancherel) measure of T_d with respect to
/// Lebesgue measure:
///   h(t) = (d/2pi) * sqrt(4(d-1) - t^2) / (d^2 - t^2)   for |t| <= 2*sqrt(d-1),
///   h(t) = 0 otherwise.
/// For d = 2 this degenerates to the arcsine density 1/(pi*sqrt(4-t^2)),
/// which is unbounded at the endpoints.
inline double kesten_mckay_density(const TreeModel& model, double t) {
    const int d = model.degree;
    const double r2 = 4.0 * double(d - 1);
    if (t * t > r2) return 0.0;
    if (d == 2) {
        // simplified form; avoids 0/0 at the endpoints of the support
        return 1.0 / (M_PI * std::sqrt(4.0 - t * t));
    }
    return (d / (2.0 * M_PI)) * std::sqrt(r2 - t * t) / (double(d) * d - t * t);
}

/// Number of length-k walks from the root that end at each distance m,
/// m = 0..k, counted exactly. Walks move along edges of T_d: from the root
/// there are d outward moves, from distance m >= 1 there is one inward move
/// and d-1 outward moves. Throws std::overflow_error if a count exceeds the
/// 64-bit range.
inline std::vector<std::uint64_t> walk_endpoint_counts(const TreeModel& model, int k) {
    if (k < 0) throw std::invalid_argument("walk_endpoint_counts: k must be >= 0");
    const std::uint64_t d = static_cast<std::uint64_t>(model.degree);
    std::vector<std::uint64_t> cur(static_cast<std::size_t>(k) + 2, 0), next(cur);
    cur[0] = 1;
    auto add_mul = [k](std::uint64_t& acc, std::uint64_t a, std::uint64_t b) {
        std::uint64_t prod;
        if (__builtin_mul_overflow(a, b, &prod) || __builtin_add_overflow(acc, prod, &acc)) {
            throw std::overflow_error("walk count overflows 64 bits at k = " +
                                      std::to_string(k));
        }
    };
    for (int step = 0; step < k; ++step) {
        std::fill(next.begin(), next.end(), 0);
        for (int m = 0; m <= step; ++m) {
            const std::uint64_t w = cur[static_cast<std::size_t>(m)];
            if (w == 0) continue;
            if (m == 0) {
                add_mul(next[1], w, d);
            } else {
                add_mul(next[static_cast<std::size_t>(m) - 1], w, 1);
                add_mul(next[static_cast<std::size_t>(m) + 1], w, d - 1);
            }
        }
        cur.swap(next);
    }
    cur.resize(static_cast<std::size_t>(k) + 1);
    return cur;
}

/// Exact number of closed length-k walks at the root of T_d. These are the
/// moments of the Kesten-McKay measure. Zero for odd k (trees are bipartite).
inline std::uint64_t closed_walk_count(const TreeModel& model, int k) {
    return walk_endpoint_counts(model, k)[0];
}

} // namespace treespec

#endif
