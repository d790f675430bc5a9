#ifndef TREESPEC_DUNAU_HPP
#define TREESPEC_DUNAU_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "treespec/quadrature.hpp"
#include "treespec/truncated_tree.hpp"

namespace treespec {

/// Evaluates the sphere polynomials r_0..r_N of T_d at t by forward
/// recurrence, writing r_n(t) into out[n]:
///
///   r_0 = 1,  r_1 = t,  r_2 = t^2 - d,
///   r_{n+1} = t*r_n - (d-1)*r_{n-1}   (n >= 2).
///
/// These satisfy r_n(A)delta_o = indicator of the distance-n sphere, which
/// forces the n = 1 step to be t*r_1 = d*r_0 + r_2 (the root has d
/// neighbors, interior vertices d-1). They are orthogonal under the
/// Kesten-McKay measure with integral r_n^2 dnu = |S_n|.
inline void dunau_values(int degree, double t, std::span<double> out) {
    const std::size_t count = out.size();
    if (count == 0) return;
    out[0] = 1.0;
    if (count > 1) out[1] = t;
    if (count > 2) out[2] = t * t - double(degree);
    for (std::size_t n = 3; n < count; ++n) {
        out[n] = t * out[n - 1] - double(degree - 1) * out[n - 2];
    }
}

/// The polynomial family r_n for one degree, bounds-checked up to max_n.
struct DunauTable {
    int degree;
    int max_n;

    DunauTable(int d, int maxn) : degree(d), max_n(maxn) {
        if (d < 2) throw std::invalid_argument("DunauTable: degree must be >= 2");
        if (maxn < 0) throw std::invalid_argument("DunauTable: max_n must be >= 0");
    }

    double eval(int n, double t) const {
        if (n < 0 || n > max_n) {
            throw std::invalid_argument("DunauTable::eval: n = " + std::to_string(n) +
                                        " out of range [0, " + std::to_string(max_n) + "]");
        }
        std::vector<double> vals(std::size_t(n) + 1);
        dunau_values(degree, t, vals);
        return vals[std::size_t(n)];
    }
};

inline double dunau_eval(const DunauTable& table, int n, double t) {
    return table.eval(n, t);
}

/// |S_n|: the number of vertices at distance n from the root of T_d.
inline std::uint64_t sphere_size(int degree, int n) {
    if (degree < 2) throw std::invalid_argument("sphere_size: degree must be >= 2");
    if (n < 0) throw std::invalid_argument("sphere_size: n must be >= 0");
    if (n == 0) return 1;
    std::uint64_t size = std::uint64_t(degree);
    for (int i = 1; i < n; ++i) {
        if (__builtin_mul_overflow(size, std::uint64_t(degree - 1), &size)) {
            throw std::overflow_error("sphere_size overflows 64 bits at n = " +
                                      std::to_string(n));
        }
    }
    return size;
}

/// |S_n| in floating point, for norms and weights where n may be large.
inline double sphere_size_real(int degree, int n) {
    if (n == 0) return 1.0;
    double size = double(degree);
    for (int i = 1; i < n; ++i) size *= double(degree - 1);
    return size;
}

/// integral r_n * r_m dnu. Equals 0 for n != m and |S_n| for n = m, up to
/// quadrature accuracy.
inline double dunau_inner(const DunauTable& table, const QuadratureRule& rule, int n, int m) {
    if (n < 0 || n > table.max_n || m < 0 || m > table.max_n) {
        throw std::invalid_argument("dunau_inner: index out of range");
    }
    const std::size_t top = std::size_t(std::max(n, m)) + 1;
    std::vector<double> vals(top);
    return integrate(rule, [&](double t) {
        dunau_values(table.degree, t, vals);
        return vals[std::size_t(n)] * vals[std::size_t(m)];
    });
}

/// Verifies r_n(A)delta_o == indicator(S_n) by direct computation on a
/// truncated tree: the recurrence is run in exact integer arithmetic with A
/// applied vertex by vertex, and the result is compared on every vertex
/// whose values are unaffected by truncation (levels <= depth - n).
/// Requires depth >= 2n.
inline bool sphere_indicator_check(int degree, int n, int depth) {
    if (n < 0) throw std::invalid_argument("sphere_indicator_check: n must be >= 0");
    if (depth < 2 * n) {
        throw std::invalid_argument("sphere_indicator_check: depth " + std::to_string(depth) +
                                    " insufficient for n = " + std::to_string(n) +
                                    " (need depth >= 2n)");
    }
    const TruncatedTree tree = build_tree(degree, depth);
    const std::uint64_t count = tree.vertex_count();

    auto apply_adjacency_exact = [&](const std::vector<std::int64_t>& in) {
        std::vector<std::int64_t> out(count, 0);
        for (std::uint64_t v = 0; v < count; ++v) {
            std::int64_t acc = 0;
            if (v != 0) acc += in[tree.parent(v)];
            const int kids = tree.child_count(v);
            if (kids > 0) {
                const std::uint64_t first = tree.first_child(v);
                for (int c = 0; c < kids; ++c) acc += in[first + std::uint64_t(c)];
            }
            out[v] = acc;
        }
        return out;
    };

    std::vector<std::int64_t> prev(count, 0), curr(count, 0);
    prev[0] = 1; // r_0(A)delta_o
    if (n >= 1) {
        curr = apply_adjacency_exact(prev); // r_1(A)delta_o = A delta_o
        for (int step = 2; step <= n; ++step) {
            std::vector<std::int64_t> next = apply_adjacency_exact(curr);
            const std::int64_t coeff = (step == 2) ? degree : degree - 1;
            for (std::uint64_t v = 0; v < count; ++v) next[v] -= coeff * prev[v];
            prev = std::move(curr);
            curr = std::move(next);
        }
    } else {
        curr = prev;
    }

    const std::uint64_t valid_end = tree.level_end(depth - n);
    for (std::uint64_t v = 0; v < valid_end; ++v) {
        const std::int64_t expect = (tree.level_of(v) == n) ? 1 : 0;
        if (curr[v] != expect) return false;
    }
    return true;
}

} // namespace treespec

#endif
