#ifndef TREESPEC_TRANSFORMS_HPP
#define TREESPEC_TRANSFORMS_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "treespec/dunau.hpp"
#include "treespec/measure.hpp"
#include "treespec/quadrature.hpp"
#include "treespec/tree_model.hpp"

namespace treespec {

/// Radial square-summable coefficients a_0..a_R on T_d: a function of
/// distance from the root, the coefficient field of a linear factor.
struct RadialCoefficients {
    int degree = 0;
    std::vector<double> values;

    int radius() const { return int(values.size()) - 1; }
};

/// ell^2 norm squared of the radial function: a_0^2 + sum_n a_n^2 |S_n|.
inline double l2_norm_sq(const RadialCoefficients& coeffs) {
    double acc = 0.0;
    for (std::size_t n = 0; n < coeffs.values.size(); ++n) {
        acc += coeffs.values[n] * coeffs.values[n] * sphere_size_real(coeffs.degree, int(n));
    }
    return acc;
}

/// Covariances c_n = cov(X_o, X_v) for |v| = n, n = 0..N. Radial by
/// transitivity.
struct CovarianceSequence {
    int degree = 0;
    std::vector<double> values;

    CovarianceSequence(int d, std::vector<double> vals) : degree(d), values(std::move(vals)) {
        if (values.empty()) throw std::invalid_argument("CovarianceSequence: need c_0");
        const double c0 = values[0];
        for (double c : values) {
            if (std::abs(c) > c0 * (1.0 + 1e-12) + 1e-12) {
                throw std::invalid_argument(
                    "CovarianceSequence: |c_n| = " + std::to_string(std::abs(c)) +
                    " exceeds c_0 = " + std::to_string(c0) + " (Cauchy-Schwarz)");
            }
        }
    }
};

/// c(n) = (1/|S_n|) * integral r_n dmu. Atoms contribute mass * r_n(location).
inline double covariance_from_measure(const SpectralMeasure& mu, int n,
                                      const QuadratureRule& rule) {
    if (n < 0) throw std::invalid_argument("covariance_from_measure: n must be >= 0");
    std::vector<double> vals(std::size_t(n) + 1);
    double acc = 0.0;
    for (const Atom& a : mu.atoms()) {
        dunau_values(mu.degree(), a.location, vals);
        acc += a.mass * vals[std::size_t(n)];
    }
    acc += integrate(rule, [&](double t) {
        dunau_values(mu.degree(), t, vals);
        return vals[std::size_t(n)] * mu.density_at(t);
    });
    return acc / sphere_size_real(mu.degree(), n);
}

/// <A^k delta_o, c> = sum_m W_k(m) c_m, where W_k(m) is the exact number of
/// length-k walks from the root ending at distance m. This equals the k-th
/// moment of the spectral measure whose covariance structure is c. Requires
/// k within the covariance radius (a length-k walk reaches distance k).
inline double moments_from_covariance(const CovarianceSequence& cov, int k) {
    if (k < 0) throw std::invalid_argument("moments_from_covariance: k must be >= 0");
    if (std::size_t(k) >= cov.values.size()) {
        throw std::invalid_argument("moments_from_covariance: k = " + std::to_string(k) +
                                    " exceeds covariance radius " +
                                    std::to_string(cov.values.size() - 1));
    }
    const std::vector<std::uint64_t> walks = walk_endpoint_counts(TreeModel(cov.degree), k);
    double acc = 0.0;
    for (std::size_t m = 0; m < walks.size(); ++m) {
        if (walks[m] != 0) acc += double(walks[m]) * cov.values[m];
    }
    return acc;
}

namespace detail {

/// Projects a function given by its node values onto span{r_0..r_N}:
/// c_n = (sum_i w_i f_i r_n(t_i)) / |S_n|, accumulated over symmetric node
/// pairs like integrate().
inline std::vector<double> expand_node_values(std::span<const double> node_vals, int N,
                                              const QuadratureRule& rule) {
    const int d = rule.degree;
    const std::size_t count = rule.size();
    std::vector<double> acc(std::size_t(N) + 1, 0.0);
    std::vector<double> lo(std::size_t(N) + 1), hi(std::size_t(N) + 1);
    for (std::size_t i = 0; i < count / 2; ++i) {
        const std::size_t j = count - 1 - i;
        dunau_values(d, rule.nodes[i], lo);
        dunau_values(d, rule.nodes[j], hi);
        const double wf_lo = rule.weights[i] * node_vals[i];
        const double wf_hi = rule.weights[j] * node_vals[j];
        for (std::size_t n = 0; n < acc.size(); ++n) {
            acc[n] += wf_lo * lo[n] + wf_hi * hi[n];
        }
    }
    if (count % 2 == 1) {
        const std::size_t mid = count / 2;
        dunau_values(d, rule.nodes[mid], lo);
        const double wf = rule.weights[mid] * node_vals[mid];
        for (std::size_t n = 0; n < acc.size(); ++n) acc[n] += wf * lo[n];
    }
    for (std::size_t n = 0; n < acc.size(); ++n) acc[n] /= sphere_size_real(d, int(n));
    return acc;
}

/// Evaluates g at the quadrature nodes, clamping roundoff-scale negative dips
/// (magnitude <= 1e-12) to 0 and rejecting anything more negative.
inline std::vector<double> density_node_values(const DensitySpec& g, const QuadratureRule& rule) {
    validate_density(g, rule.degree);
    std::vector<double> out(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
        double v = evaluate_density(g, rule.degree, rule.nodes[i]);
        if (v < 0.0) {
            if (v < -1e-12) {
                throw std::invalid_argument("invalid density: negative value " +
                                            std::to_string(v) + " at node t = " +
                                            std::to_string(rule.nodes[i]));
            }
            v = 0.0;
        }
        out[i] = v;
    }
    return out;
}

inline double pair_sum(std::span<const double> node_vals, const QuadratureRule& rule) {
    const std::size_t n = rule.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n / 2; ++i) {
        acc += rule.weights[i] * node_vals[i] + rule.weights[n - 1 - i] * node_vals[n - 1 - i];
    }
    if (n % 2 == 1) acc += rule.weights[n / 2] * node_vals[n / 2];
    return acc;
}

} // namespace detail

/// Orthogonal projection of f onto span{r_0..r_N} in L^2(nu):
/// c_n = (integral f r_n dnu) / |S_n|. Requires integral f^2 dnu finite.
template <typename F>
std::vector<double> dunau_expand(F&& f, int N, const QuadratureRule& rule) {
    if (N < 0) throw std::invalid_argument("dunau_expand: N must be >= 0");
    std::vector<double> node_vals(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
        node_vals[i] = f(rule.nodes[i]);
        if (!std::isfinite(node_vals[i])) {
            throw std::runtime_error("dunau_expand: f is non-finite at node t = " +
                                     std::to_string(rule.nodes[i]));
        }
    }
    std::vector<double> sq(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) sq[i] = node_vals[i] * node_vals[i];
    if (!std::isfinite(detail::pair_sum(sq, rule))) {
        throw std::runtime_error("dunau_expand: integral of f^2 is not finite");
    }
    return detail::expand_node_values(node_vals, N, rule);
}

/// Constructive synthesis: radial coefficients whose linear factor of an
/// i.i.d. field has spectral density (sum_{n<=R} c_n r_n)^2, the best
/// L^2(nu) degree-R approximation of the target density g. The coefficients
/// are the projection of sqrt(g) onto span{r_0..r_R}; because r_n(A)delta_o
/// is the distance-n sphere indicator, the expansion coefficient at index n
/// is exactly the radial coefficient at distance n.
inline RadialCoefficients synthesize_coefficients(const DensitySpec& g, int R,
                                                  const QuadratureRule& rule) {
    if (R < 0) throw std::invalid_argument("synthesize_coefficients: R must be >= 0");
    std::vector<double> node_vals = detail::density_node_values(g, rule);
    for (double& v : node_vals) v = std::sqrt(v);
    return RadialCoefficients{rule.degree, detail::expand_node_values(node_vals, R, rule)};
}

/// Parseval residual of the degree-R synthesis: integral g dnu minus
/// sum_{n<=R} c_n^2 |S_n|. Nonnegative by Bessel; clamped at 0 against
/// roundoff.
inline double truncation_error(const DensitySpec& g, int R, const QuadratureRule& rule) {
    const std::vector<double> node_vals = detail::density_node_values(g, rule);
    const double mass = detail::pair_sum(node_vals, rule);
    std::vector<double> sqrt_vals(node_vals.size());
    for (std::size_t i = 0; i < node_vals.size(); ++i) sqrt_vals[i] = std::sqrt(node_vals[i]);
    const std::vector<double> coeffs = detail::expand_node_values(sqrt_vals, R, rule);
    double captured = 0.0;
    for (std::size_t n = 0; n < coeffs.size(); ++n) {
        captured += coeffs[n] * coeffs[n] * sphere_size_real(rule.degree, int(n));
    }
    const double residual = mass - captured;
    return residual < 0.0 ? 0.0 : residual;
}

/// The covariance values are themselves the expansion coefficients of the
/// spectral density in the sphere polynomials, so a covariance sequence given
/// to radius N maps to the density sum_{n<=N} c_n r_n. Whether this is a
/// genuine L^2(nu) density depends on sum c_n^2 |S_n| staying bounded as N
/// grows; callers check that with l2_norm_sq.
inline DensitySpec density_from_covariance(const CovarianceSequence& cov) {
    return DunauSeriesDensity{cov.values};
}

inline double l2_norm_sq(const CovarianceSequence& cov) {
    return l2_norm_sq(RadialCoefficients{cov.degree, cov.values});
}

} // namespace treespec

#endif
