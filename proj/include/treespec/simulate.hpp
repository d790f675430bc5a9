#ifndef TREESPEC_SIMULATE_HPP
#define TREESPEC_SIMULATE_HPP

#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "treespec/dunau.hpp"
#include "treespec/measure.hpp"
#include "treespec/quadrature.hpp"
#include "treespec/rng.hpp"
#include "treespec/transforms.hpp"
#include "treespec/truncated_tree.hpp"

namespace treespec {

/// Real-valued field on a truncated tree. Values at vertices of level
/// <= valid_radius agree exactly (in law and in construction) with the
/// corresponding field on the infinite tree; values beyond that are
/// unspecified boundary-affected leftovers.
struct FieldSample {
    TruncatedTree tree;
    std::vector<double> values;
    int valid_radius = 0;
};

/// Independent standard normals, one per vertex, keyed on (seed, vertex) so
/// every value is reproducible independently of generation order.
inline FieldSample sample_iid_gaussian(const TruncatedTree& tree, std::uint64_t seed) {
    std::vector<double> values(tree.vertex_count());
    for (std::uint64_t v = 0; v < tree.vertex_count(); ++v) {
        values[v] = rng::standard_normal(seed, v);
    }
    return FieldSample{tree, std::move(values), tree.depth()};
}

/// X_v = sum over u with dist(u,v) <= R of a_{dist(u,v)} * Z_u, evaluated on
/// every vertex whose R-ball lies inside the tree (levels <= depth - R); no
/// boundary condition is invented for the rest. The sum is decomposed along
/// the ancestor chain of v: vertices below ancestor i at relative depth j,
/// minus those already under ancestor i-1, sit at distance i+j. Each such
/// slab is contiguous in the level-by-level layout, so one prefix-sum array
/// serves all vertices.
inline FieldSample apply_linear_factor(const TruncatedTree& tree,
                                       const RadialCoefficients& coeffs,
                                       const FieldSample& z) {
    const int D = tree.depth();
    const int R = coeffs.radius();
    if (coeffs.degree != tree.degree()) {
        throw std::invalid_argument("apply_linear_factor: coefficient degree mismatch");
    }
    if (R > D) {
        throw std::invalid_argument("apply_linear_factor: radius " + std::to_string(R) +
                                    " exceeds tree depth " + std::to_string(D));
    }
    if (z.valid_radius < D) {
        throw std::invalid_argument("apply_linear_factor: input field must be valid to "
                                    "the full depth");
    }
    const std::uint64_t count = tree.vertex_count();
    if (z.values.size() != count) {
        throw std::invalid_argument("apply_linear_factor: field does not match the tree");
    }
    std::vector<double> prefix(count + 1, 0.0);
    for (std::uint64_t v = 0; v < count; ++v) prefix[v + 1] = prefix[v] + z.values[v];
    auto range_sum = [&](std::uint64_t lo, std::uint64_t hi) { return prefix[hi] - prefix[lo]; };
    auto advance = [&](std::uint64_t& lo, std::uint64_t& hi) {
        const std::uint64_t last = hi - 1;
        lo = tree.first_child(lo);
        hi = tree.first_child(last) + std::uint64_t(tree.child_count(last));
    };

    std::vector<double> values(count, 0.0);
    const std::span<const double> a(coeffs.values);
    std::vector<std::uint64_t> chain;
    const std::uint64_t valid_end = tree.level_end(D - R);
    for (std::uint64_t v = 0; v < valid_end; ++v) {
        const int level = tree.level_of(v);
        chain.assign(1, v);
        for (int i = 1; i <= std::min(R, level); ++i) chain.push_back(tree.parent(chain.back()));

        double x = 0.0;
        for (std::size_t i = 0; i < chain.size(); ++i) {
            // cur walks subtree(chain[i]) by relative depth j; prev walks
            // subtree(chain[i-1]) one step behind, the part to exclude.
            // What remains sits at distance i + j from v.
            std::uint64_t cur_lo = chain[i], cur_hi = chain[i] + 1;
            std::uint64_t prev_lo = 0, prev_hi = 0;
            const int top = R - int(i);
            for (int j = 0; j <= top; ++j) {
                double slab = range_sum(cur_lo, cur_hi);
                if (i > 0 && j >= 1) slab -= range_sum(prev_lo, prev_hi);
                x += a[i + std::size_t(j)] * slab;
                if (j == top) break;
                if (i > 0) {
                    if (j == 0) {
                        prev_lo = chain[i - 1];
                        prev_hi = chain[i - 1] + 1;
                    } else {
                        advance(prev_lo, prev_hi);
                    }
                }
                advance(cur_lo, cur_hi);
            }
        }
        values[v] = x;
    }
    return FieldSample{tree, std::move(values), D - R};
}

/// Markov field with cov(X_u, X_v) = rho^dist(u,v): standard normal at the
/// root, each child rho * parent + sqrt(1-rho^2) * fresh normal.
inline FieldSample sample_gauss_markov(const TruncatedTree& tree, double rho,
                                       std::uint64_t seed) {
    if (!(std::abs(rho) <= 1.0)) {
        throw std::invalid_argument("sample_gauss_markov: |rho| must be <= 1");
    }
    const double noise = std::sqrt(1.0 - rho * rho);
    std::vector<double> values(tree.vertex_count());
    values[0] = rng::standard_normal(seed, 0);
    for (std::uint64_t v = 1; v < tree.vertex_count(); ++v) {
        values[v] = rho * values[tree.parent(v)] + noise * rng::standard_normal(seed, v);
    }
    return FieldSample{tree, std::move(values), tree.depth()};
}

// ---------------------------------------------------------------------------
// Branching Markov chains
// ---------------------------------------------------------------------------

/// Reversible finite Markov chain spread over the tree, observed through phi.
/// The stationary distribution is uniform, so reversibility means the
/// transition matrix is symmetric. phi must be a mean-zero eigenvector of M;
/// the associated eigenvalue rho gives corr(phi(X_o), phi(X_v)) = rho^|v|.
struct MarkovSpec {
    int states = 0;
    std::vector<double> transition; // row-major states x states
    std::vector<double> observable; // phi per state
    double rho = 0.0;               // eigenvalue of M on phi

    MarkovSpec(int s, std::vector<double> M, std::vector<double> phi)
        : states(s), transition(std::move(M)), observable(std::move(phi)) {
        if (states < 1) throw std::invalid_argument("MarkovSpec: need at least one state");
        const std::size_t n = std::size_t(states);
        if (transition.size() != n * n) {
            throw std::invalid_argument("MarkovSpec: transition matrix must be s x s");
        }
        if (observable.size() != n) {
            throw std::invalid_argument("MarkovSpec: observable must have one value per state");
        }
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double m = transition[i * n + j];
                if (m < 0.0) throw std::invalid_argument("MarkovSpec: negative transition entry");
                if (std::abs(m - transition[j * n + i]) > 1e-12) {
                    throw std::invalid_argument(
                        "MarkovSpec: not reversible w.r.t. the uniform distribution "
                        "(transition matrix must be symmetric)");
                }
                row += m;
            }
            if (std::abs(row - 1.0) > 1e-12) {
                throw std::invalid_argument("MarkovSpec: row " + std::to_string(i) +
                                            " sums to " + std::to_string(row));
            }
        }
        double mean = 0.0, norm = 0.0;
        for (double p : observable) mean += p, norm += p * p;
        if (std::abs(mean) > 1e-12 * n) {
            throw std::invalid_argument("MarkovSpec: observable must have mean zero under "
                                        "the uniform distribution");
        }
        if (norm == 0.0) throw std::invalid_argument("MarkovSpec: observable is zero");
        double dot = 0.0;
        std::vector<double> image(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) image[i] += transition[i * n + j] * observable[j];
            dot += image[i] * observable[i];
        }
        rho = dot / norm;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(image[i] - rho * observable[i]) > 1e-10 * (1.0 + std::abs(rho))) {
                throw std::invalid_argument("MarkovSpec: observable is not an eigenvector of "
                                            "the transition matrix");
            }
        }
    }
};

/// Two-state symmetric chain on {-1, +1} with second eigenvalue rho.
inline MarkovSpec make_ising_spec(double rho) {
    if (!(std::abs(rho) <= 1.0)) {
        throw std::invalid_argument("make_ising_spec: |rho| must be <= 1");
    }
    const double p = (1.0 + rho) / 2.0, q = (1.0 - rho) / 2.0;
    return MarkovSpec(2, {p, q, q, p}, {-1.0, 1.0});
}

/// Root state uniform on S, children drawn from the parent's transition row,
/// conditionally independent. The field records phi(state).
inline FieldSample sample_branching_markov(const TruncatedTree& tree, const MarkovSpec& spec,
                                           std::uint64_t seed) {
    const std::size_t s = std::size_t(spec.states);
    std::vector<std::uint32_t> state(tree.vertex_count());
    state[0] = rng::uniform_index(seed, 0, 0, std::uint32_t(s));
    for (std::uint64_t v = 1; v < tree.vertex_count(); ++v) {
        const std::uint32_t from = state[tree.parent(v)];
        const double u = rng::uniform01(seed, v, 0);
        double cum = 0.0;
        std::uint32_t to = std::uint32_t(s) - 1;
        for (std::size_t j = 0; j < s; ++j) {
            cum += spec.transition[from * s + j];
            if (u <= cum) {
                to = std::uint32_t(j);
                break;
            }
        }
        state[v] = to;
    }
    std::vector<double> values(tree.vertex_count());
    for (std::uint64_t v = 0; v < tree.vertex_count(); ++v) {
        values[v] = spec.observable[state[v]];
    }
    return FieldSample{tree, std::move(values), tree.depth()};
}

/// Sums neighbor values: (A X)_v = X_parent + sum of X_children. Costs one
/// level of validity.
inline FieldSample apply_adjacency(const TruncatedTree& tree, const FieldSample& field) {
    if (field.valid_radius < 1) {
        throw std::invalid_argument("apply_adjacency: field has no valid radius left");
    }
    std::vector<double> values(tree.vertex_count(), 0.0);
    for (std::uint64_t v = 0; v < tree.vertex_count(); ++v) {
        double acc = 0.0;
        if (v != 0) acc += field.values[tree.parent(v)];
        const int kids = tree.child_count(v);
        if (kids > 0) {
            const std::uint64_t first = tree.first_child(v);
            for (int c = 0; c < kids; ++c) acc += field.values[first + std::uint64_t(c)];
        }
        values[v] = acc;
    }
    return FieldSample{tree, std::move(values), field.valid_radius - 1};
}

inline double sphere_sum(const FieldSample& field, int n) {
    if (n < 0 || n > field.tree.depth()) {
        throw std::invalid_argument("sphere_sum: no such sphere in the tree");
    }
    double acc = 0.0;
    for (std::uint64_t v = field.tree.level_begin(n); v < field.tree.level_end(n); ++v) {
        acc += field.values[v];
    }
    return acc;
}

inline double sphere_average(const FieldSample& field, int n) {
    return sphere_sum(field, n) / double(field.tree.level_size(n));
}

// ---------------------------------------------------------------------------
// Monte Carlo estimation
// ---------------------------------------------------------------------------

using FieldSampler = std::function<FieldSample(std::uint64_t)>;

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Mean and standard error of fn(0..n_samples-1). Per-sample values are
/// written into a slot array (samples may be evaluated by several threads)
/// and reduced sequentially, so the result is bit-identical for every thread
/// count.
inline MonteCarloEstimate monte_carlo_mean(const std::function<double(std::uint64_t)>& fn,
                                           std::uint64_t n_samples, unsigned n_threads = 1) {
    if (n_samples < 2) throw std::invalid_argument("monte_carlo_mean: need at least 2 samples");
    std::vector<double> stats(n_samples);
    const unsigned workers = std::max(1u, n_threads);
    if (workers == 1) {
        for (std::uint64_t i = 0; i < n_samples; ++i) stats[i] = fn(i);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        const std::uint64_t chunk = (n_samples + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                const std::uint64_t lo = std::uint64_t(w) * chunk;
                const std::uint64_t hi = std::min(n_samples, lo + chunk);
                try {
                    for (std::uint64_t i = lo; i < hi; ++i) stats[i] = fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    double mean = 0.0;
    for (double s : stats) mean += s;
    mean /= double(n_samples);
    double ss = 0.0;
    for (double s : stats) ss += (s - mean) * (s - mean);
    const double var = ss / double(n_samples - 1);
    return MonteCarloEstimate{mean, std::sqrt(var / double(n_samples))};
}

/// Estimates cov(X_o, X_v) for |v| = n: each sample contributes X_o times the
/// average of X over the distance-n sphere, and the standard error comes from
/// the spread of those per-sample values (honest despite within-sphere
/// correlation).
inline MonteCarloEstimate empirical_covariance(const FieldSampler& sampler, int n,
                                               std::uint64_t n_samples, unsigned n_threads = 1) {
    return monte_carlo_mean(
        [&](std::uint64_t i) {
            const FieldSample field = sampler(i);
            if (n > field.valid_radius) {
                throw std::invalid_argument("empirical_covariance: distance " +
                                            std::to_string(n) + " exceeds valid radius " +
                                            std::to_string(field.valid_radius));
            }
            return field.values[0] * sphere_average(field, n);
        },
        n_samples, n_threads);
}

struct IsometryCheck {
    double lhs = 0.0;      // Monte Carlo E[(p(A)X)_o^2]
    double rhs = 0.0;      // integral p^2 dmu
    double std_error = 0.0;
    bool pass = false;
};

/// Checks E[(p(A)X)_o^2] == integral p^2 dmu_X, with p given by its
/// coefficients in the sphere polynomial basis (p = sum b_n r_n, so
/// (p(A)X)_o is the b-weighted sum of sphere sums of X). Pass criterion is
/// agreement within 4 standard errors.
inline IsometryCheck empirical_isometry_check(std::span<const double> p_dunau,
                                              const FieldSampler& sampler,
                                              const SpectralMeasure& mu,
                                              const QuadratureRule& rule,
                                              std::uint64_t n_samples, unsigned n_threads = 1) {
    if (p_dunau.empty()) throw std::invalid_argument("empirical_isometry_check: empty polynomial");
    const int deg = int(p_dunau.size()) - 1;
    const MonteCarloEstimate lhs = monte_carlo_mean(
        [&](std::uint64_t i) {
            const FieldSample field = sampler(i);
            if (deg > field.valid_radius) {
                throw std::invalid_argument("empirical_isometry_check: polynomial degree "
                                            "exceeds the field's valid radius");
            }
            double v = 0.0;
            for (int n = 0; n <= deg; ++n) v += p_dunau[std::size_t(n)] * sphere_sum(field, n);
            return v * v;
        },
        n_samples, n_threads);

    std::vector<double> vals(p_dunau.size());
    auto p_at = [&](double t) {
        dunau_values(mu.degree(), t, vals);
        double p = 0.0;
        for (std::size_t n = 0; n < vals.size(); ++n) p += p_dunau[n] * vals[n];
        return p;
    };
    double rhs = 0.0;
    for (const Atom& a : mu.atoms()) {
        const double p = p_at(a.location);
        rhs += a.mass * p * p;
    }
    rhs += integrate(rule, [&](double t) {
        const double p = p_at(t);
        return p * p * mu.density_at(t);
    });
    const bool pass = std::abs(lhs.estimate - rhs) <= 4.0 * lhs.std_error;
    return IsometryCheck{lhs.estimate, rhs, lhs.std_error, pass};
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

inline FieldSampler make_iid_sampler(TruncatedTree tree, std::uint64_t seed) {
    return [tree = std::move(tree), seed](std::uint64_t i) {
        return sample_iid_gaussian(tree, rng::derive_seed(seed, i));
    };
}

inline FieldSampler make_gauss_markov_sampler(TruncatedTree tree, double rho,
                                              std::uint64_t seed) {
    return [tree = std::move(tree), rho, seed](std::uint64_t i) {
        return sample_gauss_markov(tree, rho, rng::derive_seed(seed, i));
    };
}

inline FieldSampler make_branching_markov_sampler(TruncatedTree tree, MarkovSpec spec,
                                                  std::uint64_t seed) {
    return [tree = std::move(tree), spec = std::move(spec), seed](std::uint64_t i) {
        return sample_branching_markov(tree, spec, rng::derive_seed(seed, i));
    };
}

/// i.i.d. field followed by the linear factor; the straightforward pipeline.
inline FieldSampler make_linear_factor_sampler(TruncatedTree tree, RadialCoefficients coeffs,
                                               std::uint64_t seed) {
    return [tree = std::move(tree), coeffs = std::move(coeffs), seed](std::uint64_t i) {
        const FieldSample z = sample_iid_gaussian(tree, rng::derive_seed(seed, i));
        return apply_linear_factor(tree, coeffs, z);
    };
}

/// Samples the linear-factor field restricted to a root window of depth L,
/// with exactly the law of make_linear_factor_sampler on a tree of depth
/// L + R restricted to its valid region, at a cost that does not grow with
/// the tree size.
///
/// X on the window depends on the i.i.d. field only through (a) the
/// individual Z at window vertices above level L and (b) the per-depth
/// subtree sums U_b(j) = sum of Z over subtree(b) at relative depth j for
/// each level-L vertex b. The U_b(j) are sums over pairwise disjoint vertex
/// sets, hence independent centered normals with variance equal to the
/// vertex count. Drawing those directly and assembling
///
///   B_v(j) = sum of Z at distance j from v
///   B_root = U_root,  B_c(j) = U_c(j) + B_parent(j-1) - U_c(j-2)
///
/// bottom-up (U) and top-down (B) reproduces the joint law of
/// X_v = sum_j a_j B_v(j) on the whole window.
class LinearFactorWindowSampler {
public:
    LinearFactorWindowSampler(RadialCoefficients coeffs, int window_depth, std::uint64_t seed)
        : coeffs_(std::move(coeffs)),
          window_(build_tree(coeffs_.degree, window_depth)),
          seed_(seed) {
        if (window_depth < 0) {
            throw std::invalid_argument("LinearFactorWindowSampler: window depth must be >= 0");
        }
        const int R = coeffs_.radius();
        const int d = coeffs_.degree;
        // standard deviations of the boundary subtree sums
        boundary_sd_.resize(std::size_t(R) + 1);
        double count = 1.0;
        for (int j = 0; j <= R; ++j) {
            boundary_sd_[std::size_t(j)] = std::sqrt(count);
            count *= (window_depth == 0 && j == 0) ? double(d) : double(d - 1);
        }
    }

    /// Depth of the truncated tree this window simulates.
    int simulated_depth() const { return window_.depth() + coeffs_.radius(); }

    const TruncatedTree& window() const { return window_; }

    FieldSample operator()(std::uint64_t sample_index) const {
        const std::uint64_t seed = rng::derive_seed(seed_, sample_index);
        const int R = coeffs_.radius();
        const int L = window_.depth();
        const std::uint64_t count = window_.vertex_count();
        const std::size_t stride = std::size_t(R) + 1;

        std::vector<double> U(count * stride, 0.0);
        for (std::uint64_t b = window_.level_begin(L); b < count; ++b) {
            for (int j = 0; j <= R; ++j) {
                U[b * stride + std::size_t(j)] =
                    boundary_sd_[std::size_t(j)] * rng::standard_normal(seed, b, 1 + std::uint64_t(j));
            }
        }
        for (int level = L - 1; level >= 0; --level) {
            for (std::uint64_t w = window_.level_begin(level); w < window_.level_end(level); ++w) {
                U[w * stride] = rng::standard_normal(seed, w, 0);
                const std::uint64_t first = window_.first_child(w);
                const int kids = window_.child_count(w);
                for (int j = 1; j <= R; ++j) {
                    double acc = 0.0;
                    for (int c = 0; c < kids; ++c) {
                        acc += U[(first + std::uint64_t(c)) * stride + std::size_t(j) - 1];
                    }
                    U[w * stride + std::size_t(j)] = acc;
                }
            }
        }

        std::vector<double> B(count * stride, 0.0);
        for (int j = 0; j <= R; ++j) B[std::size_t(j)] = U[std::size_t(j)];
        for (int level = 1; level <= L; ++level) {
            for (std::uint64_t v = window_.level_begin(level); v < window_.level_end(level); ++v) {
                const std::uint64_t p = window_.parent(v);
                B[v * stride] = U[v * stride];
                for (int j = 1; j <= R; ++j) {
                    double val = U[v * stride + std::size_t(j)] + B[p * stride + std::size_t(j) - 1];
                    if (j >= 2) val -= U[v * stride + std::size_t(j) - 2];
                    B[v * stride + std::size_t(j)] = val;
                }
            }
        }

        std::vector<double> values(count, 0.0);
        for (std::uint64_t v = 0; v < count; ++v) {
            double x = 0.0;
            for (int j = 0; j <= R; ++j) {
                x += coeffs_.values[std::size_t(j)] * B[v * stride + std::size_t(j)];
            }
            values[v] = x;
        }
        return FieldSample{window_, std::move(values), L};
    }

private:
    RadialCoefficients coeffs_;
    TruncatedTree window_;
    std::uint64_t seed_;
    std::vector<double> boundary_sd_;
};

} // namespace treespec

#endif
