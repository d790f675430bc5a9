#ifndef TREESPEC_QUADRATURE_HPP
#define TREESPEC_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "treespec/tree_model.hpp"

namespace treespec {

/// Discrete rule for integrating against the Kesten-McKay measure nu of T_d.
/// Nodes are strictly increasing, symmetric about 0 (t[i] == -t[n-1-i]
/// exactly), weights are positive and sum to 1.
struct QuadratureRule {
    int degree = 0;
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// Builds a rule for integrating against nu via the substitution
/// t = 2*sqrt(d-1)*cos(theta), which turns the endpoint square-root decay of
/// the density into a smooth periodic integrand in theta:
///
///   integral f dnu = integral_0^pi f(2s cos th) * w(th) dth,
///   w(th) = (2 d (d-1) / pi) * sin^2 th / ((d-2)^2 + 4(d-1) sin^2 th),
///
/// discretized with the midpoint rule theta_j = (j+1/2)pi/n (the
/// Chebyshev-Gauss points). Convergence is geometric for integrands analytic
/// on the support, so moments match the walk-count oracle far below 1e-10
/// already at modest node counts. Weights are normalized so they sum to 1.
inline QuadratureRule build_quadrature(const TreeModel& model, int n_nodes = 4096) {
    if (n_nodes < 2) {
        throw std::invalid_argument("build_quadrature: need at least 2 nodes, got " +
                                    std::to_string(n_nodes));
    }
    const int d = model.degree;
    const std::size_t n = static_cast<std::size_t>(n_nodes);
    const double scale = 2.0 * std::sqrt(double(d - 1));
    const double a = double(d - 2) * double(d - 2);
    const double b = 4.0 * double(d - 1);

    QuadratureRule rule;
    rule.degree = d;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    // Fill the positive half and mirror, so nodes are negated bit-exactly.
    for (std::size_t j = 0; j < n / 2; ++j) {
        const double theta = (double(j) + 0.5) * M_PI / double(n_nodes);
        const double c = std::cos(theta);
        const double s2 = 1.0 - c * c;
        const double w = (2.0 * d * double(d - 1) / double(n_nodes)) * s2 / (a + b * s2);
        rule.nodes[n - 1 - j] = scale * c;
        rule.nodes[j] = -scale * c;
        rule.weights[n - 1 - j] = w;
        rule.weights[j] = w;
    }
    if (n % 2 == 1) {
        const std::size_t mid = n / 2;
        rule.nodes[mid] = 0.0;
        rule.weights[mid] = (2.0 * d * double(d - 1) / double(n_nodes)) / (a + b);
    }

    // nu is a probability measure; pin the discrete mass to 1.
    double total = 0.0;
    for (double w : rule.weights) total += w;
    for (double& w : rule.weights) w /= total;
    return rule;
}

/// Integrates f against the rule's measure: sum of weights[i]*f(nodes[i]).
/// Symmetric node pairs are summed together, so exactly odd integrands cancel
/// to 0 instead of accumulating roundoff at the scale of |f|.
/// Throws std::runtime_error if f is non-finite at some node.
template <typename F>
double integrate(const QuadratureRule& rule, F&& f) {
    const std::size_t n = rule.size();
    auto eval = [&](std::size_t i) {
        const double v = f(rule.nodes[i]);
        if (!std::isfinite(v)) {
            throw std::runtime_error("integrate: integrand is non-finite at node t = " +
                                     std::to_string(rule.nodes[i]) + " (index " +
                                     std::to_string(i) + ")");
        }
        return v;
    };
    double acc = 0.0;
    for (std::size_t i = 0; i < n / 2; ++i) {
        acc += rule.weights[i] * eval(i) + rule.weights[n - 1 - i] * eval(n - 1 - i);
    }
    if (n % 2 == 1) acc += rule.weights[n / 2] * eval(n / 2);
    return acc;
}

} // namespace treespec

#endif
