#ifndef TREESPEC_DBAR_HPP
#define TREESPEC_DBAR_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "treespec/measure.hpp"
#include "treespec/quadrature.hpp"
#include "treespec/simulate.hpp"

namespace treespec {

/// Lower bound on the dbar_2 distance of mean-zero invariant processes with
/// variances var_x, var_y and total variation distance dtv between their
/// spectral measures:
///
///   dbar_2(X, Y) >= sqrt( s - sqrt(s^2 - 4 dtv^2) ),  s = var_x + var_y.
///
/// Requires 2*dtv <= s, which holds automatically when dtv is a TV distance
/// between measures of those masses.
inline double dbar_lower_bound(double var_x, double var_y, double dtv) {
    if (var_x < 0.0 || var_y < 0.0 || dtv < 0.0) {
        throw std::invalid_argument("dbar_lower_bound: arguments must be nonnegative");
    }
    const double s = var_x + var_y;
    if (2.0 * dtv > s * (1.0 + 1e-12)) {
        throw std::invalid_argument("dbar_lower_bound: 2*dtv = " + std::to_string(2.0 * dtv) +
                                    " exceeds var_x + var_y = " + std::to_string(s));
    }
    double radicand = s * s - 4.0 * dtv * dtv;
    if (radicand < 0.0) radicand = 0.0;
    return std::sqrt(s - std::sqrt(radicand));
}

struct Delta1Check {
    double lhs = 0.0;  // integral (sqrt f - sqrt g)^2 dnu
    double rhs = 0.0;  // s - sqrt(s^2 - Delta_1^2)
    bool pass = false;
};

/// Checks the inequality
///   integral (sqrt f - sqrt g)^2 >= s - sqrt(s^2 - Delta_1^2)
/// with s = integral (f + g) and Delta_1 = integral |f - g|, all against the
/// rule's measure. Negative dips of roundoff size in f, g are clamped to 0
/// before taking square roots.
template <typename F, typename G>
Delta1Check delta1_check(F&& f, G&& g, const QuadratureRule& rule) {
    auto clamp0 = [](double v) { return v < 0.0 ? 0.0 : v; };
    const double lhs = integrate(rule, [&](double t) {
        const double a = std::sqrt(clamp0(f(t))), b = std::sqrt(clamp0(g(t)));
        return (a - b) * (a - b);
    });
    const double s = integrate(rule, [&](double t) { return clamp0(f(t)) + clamp0(g(t)); });
    const double d1 = integrate(rule, [&](double t) { return std::abs(clamp0(f(t)) - clamp0(g(t))); });
    double radicand = s * s - d1 * d1;
    if (radicand < 0.0) radicand = 0.0;
    const double rhs = s - std::sqrt(radicand);
    return Delta1Check{lhs, rhs, lhs >= rhs - 1e-10};
}

/// Universal bound on |E(X_o Y_o)| over all invariant couplings of processes
/// with these spectral measures; equals 0 exactly when the measures are
/// mutually singular (so the processes are orthogonal in every coupling).
inline double coupling_product_bound(const SpectralMeasure& mu_x, const SpectralMeasure& mu_y,
                                     const QuadratureRule& rule) {
    return hellinger_affinity(mu_x, mu_y, rule);
}

/// A coupled sampler produces the root values (X_o, Y_o) of one draw from a
/// specific invariant coupling, keyed by sample index.
using CoupledSampler = std::function<std::pair<double, double>(std::uint64_t)>;

/// Monte Carlo estimate of E[(X_o - Y_o)^2] for the given coupling: an upper
/// bound witness for dbar_2^2.
inline MonteCarloEstimate empirical_dbar_witness(const CoupledSampler& sampler,
                                                 std::uint64_t n_samples,
                                                 unsigned n_threads = 1) {
    return monte_carlo_mean(
        [&](std::uint64_t i) {
            const auto [x, y] = sampler(i);
            const double diff = x - y;
            return diff * diff;
        },
        n_samples, n_threads);
}

} // namespace treespec

#endif
