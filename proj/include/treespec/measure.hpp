#ifndef TREESPEC_MEASURE_HPP
#define TREESPEC_MEASURE_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "treespec/dunau.hpp"
#include "treespec/quadrature.hpp"
#include "treespec/tree_model.hpp"

namespace treespec {

/// True iff the unit-variance Markov covariance rho^|v| on T_d belongs to a
/// factor-of-i.i.d. process: |rho| <= 1/sqrt(d-1), endpoint included.
/// d = 2 is rejected: the endpoint rho = 1 degenerates to a constant process
/// and the endpoint density is not integrable against the arcsine law.
inline bool gauss_markov_is_fiid(int degree, double rho) {
    if (degree == 2) {
        throw std::domain_error("gauss_markov_is_fiid: d = 2 is not supported "
                                "(endpoint degenerates on the line)");
    }
    if (degree < 2) throw std::invalid_argument("gauss_markov_is_fiid: degree must be >= 3");
    if (!(std::abs(rho) <= 1.0)) {
        throw std::invalid_argument("gauss_markov_is_fiid: |rho| must be <= 1");
    }
    return std::abs(rho) <= 1.0 / std::sqrt(double(degree - 1));
}

/// Spectral density (w.r.t. the Kesten-McKay measure nu) of the unit-variance
/// Markov process with covariance rho^|v|:
///
///   f_rho(x) = (1 - rho^2) / (1 + rho^2 (d-1) - x rho).
///
/// The numerator normalizes the mass to 1; it is forced by the expansion
/// f_rho = sum_k rho^k r_k in the sphere polynomials, whose generating
/// function is (1 - y^2)/(1 - x y + (d-1) y^2), and by the d = 2 case where
/// f_rho must reduce to the classical Poisson kernel of an AR(1) sequence.
/// At |rho| = 1/sqrt(d-1) the density has an integrable singularity at one
/// endpoint of the support.
inline double gauss_markov_density(int degree, double rho, double x) {
    return (1.0 - rho * rho) / (1.0 + rho * rho * double(degree - 1) - x * rho);
}

/// Spectral density of the Gaussian free field on T_d (d >= 3; the walk must
/// be transient): d/(d - x). Its mass against nu is (d-1)/(d-2), the Green
/// function at the root.
inline double green_density(int degree, double x) {
    if (degree == 2) {
        throw std::domain_error("green_density: d = 2 is recurrent, the Green function "
                                "diverges");
    }
    if (degree < 2) throw std::invalid_argument("green_density: degree must be >= 3");
    return double(degree) / (double(degree) - x);
}

// ---------------------------------------------------------------------------
// Density specifications
// ---------------------------------------------------------------------------

struct ConstantDensity {
    double value = 1.0;

    friend bool operator==(const ConstantDensity&, const ConstantDensity&) = default;
};

struct GaussMarkovDensity {
    double rho = 0.0;

    friend bool operator==(const GaussMarkovDensity&, const GaussMarkovDensity&) = default;
};

struct GreenFunctionDensity {
    friend bool operator==(const GreenFunctionDensity&, const GreenFunctionDensity&) = default;
};

/// sum_n coefficients[n] * r_n(t); may be negative, checked against the
/// quadrature nodes when used as a measure density.
struct DunauSeriesDensity {
    std::vector<double> coefficients;

    friend bool operator==(const DunauSeriesDensity&, const DunauSeriesDensity&) = default;
};

/// (sum_n coefficients[n] * r_n(t))^2; nonnegative by construction.
struct SquaredDunauSeriesDensity {
    std::vector<double> coefficients;

    friend bool operator==(const SquaredDunauSeriesDensity&, const SquaredDunauSeriesDensity&) = default;
};

using DensitySpec = std::variant<ConstantDensity, GaussMarkovDensity, GreenFunctionDensity,
                                 DunauSeriesDensity, SquaredDunauSeriesDensity>;

inline double evaluate_density(const DensitySpec& spec, int degree, double t) {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ConstantDensity>) {
                return s.value;
            } else if constexpr (std::is_same_v<T, GaussMarkovDensity>) {
                return gauss_markov_density(degree, s.rho, t);
            } else if constexpr (std::is_same_v<T, GreenFunctionDensity>) {
                return green_density(degree, t);
            } else if constexpr (std::is_same_v<T, DunauSeriesDensity>) {
                std::vector<double> vals(s.coefficients.size());
                dunau_values(degree, t, vals);
                double acc = 0.0;
                for (std::size_t n = 0; n < vals.size(); ++n) acc += s.coefficients[n] * vals[n];
                return acc;
            } else {
                std::vector<double> vals(s.coefficients.size());
                dunau_values(degree, t, vals);
                double acc = 0.0;
                for (std::size_t n = 0; n < vals.size(); ++n) acc += s.coefficients[n] * vals[n];
                return acc * acc;
            }
        },
        spec);
}

/// Structural zero test (used to reject degenerate measures).
inline bool density_is_zero(const DensitySpec& spec) {
    return std::visit(
        [](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ConstantDensity>) {
                return s.value == 0.0;
            } else if constexpr (std::is_same_v<T, GaussMarkovDensity> ||
                                 std::is_same_v<T, GreenFunctionDensity>) {
                return false;
            } else {
                return std::all_of(s.coefficients.begin(), s.coefficients.end(),
                                   [](double c) { return c == 0.0; });
            }
        },
        spec);
}

/// Checks the per-kind invariants that do not need a quadrature rule.
inline void validate_density(const DensitySpec& spec, int degree) {
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ConstantDensity>) {
                if (!(s.value >= 0.0)) {
                    throw std::invalid_argument("ConstantDensity: value must be >= 0");
                }
            } else if constexpr (std::is_same_v<T, GaussMarkovDensity>) {
                if (degree == 2) {
                    throw std::domain_error("GaussMarkovDensity: d = 2 is not supported");
                }
                const double bound = 1.0 / std::sqrt(double(degree - 1));
                if (!(std::abs(s.rho) <= bound)) {
                    throw std::invalid_argument(
                        "GaussMarkovDensity: |rho| = " + std::to_string(std::abs(s.rho)) +
                        " exceeds 1/sqrt(d-1) = " + std::to_string(bound) +
                        "; the covariance rho^|v| is not square-summable");
                }
            } else if constexpr (std::is_same_v<T, GreenFunctionDensity>) {
                if (degree == 2) {
                    throw std::domain_error("GreenFunctionDensity: d = 2 is recurrent");
                }
            }
        },
        spec);
}

// ---------------------------------------------------------------------------
// Spectral measures
// ---------------------------------------------------------------------------

struct Atom {
    double location = 0.0;
    double mass = 0.0;

    friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite measure on [-d, d] represented as finitely many atoms plus an
/// absolutely continuous part with density `density` w.r.t. the Kesten-McKay
/// measure nu. Every measure handled here is of this form; singular
/// continuous parts are out of scope.
class SpectralMeasure {
public:
    SpectralMeasure(int degree, std::vector<Atom> atoms, DensitySpec density,
                    const QuadratureRule& rule)
        : degree_(degree), atoms_(std::move(atoms)), density_(std::move(density)) {
        if (degree_ < 2) throw std::invalid_argument("SpectralMeasure: degree must be >= 2");
        if (rule.degree != degree_) {
            throw std::invalid_argument("SpectralMeasure: quadrature rule degree mismatch");
        }
        validate_density(density_, degree_);
        std::sort(atoms_.begin(), atoms_.end(),
                  [](const Atom& a, const Atom& b) { return a.location < b.location; });
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (!(atoms_[i].mass > 0.0)) {
                throw std::invalid_argument("SpectralMeasure: atom masses must be > 0");
            }
            if (std::abs(atoms_[i].location) > double(degree_)) {
                throw std::invalid_argument("SpectralMeasure: atom location " +
                                            std::to_string(atoms_[i].location) +
                                            " outside [-d, d]");
            }
            if (i > 0 && atoms_[i].location == atoms_[i - 1].location) {
                throw std::invalid_argument("SpectralMeasure: atom locations must be distinct");
            }
        }
        for (double t : rule.nodes) {
            if (evaluate_density(density_, degree_, t) < -1e-12) {
                throw std::invalid_argument("SpectralMeasure: density is negative at node t = " +
                                            std::to_string(t));
            }
        }
        // also verifies the integral is finite
        (void)integrate(rule, [&](double t) { return density_at(t); });
    }

    int degree() const { return degree_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const DensitySpec& density() const { return density_; }

    /// Density w.r.t. nu; dips below zero of magnitude <= 1e-12 (roundoff in
    /// series evaluation) are clamped to 0.
    double density_at(double t) const {
        const double v = evaluate_density(density_, degree_, t);
        return v < 0.0 ? 0.0 : v;
    }

    bool is_structurally_zero() const { return atoms_.empty() && density_is_zero(density_); }

private:
    int degree_;
    std::vector<Atom> atoms_;
    DensitySpec density_;
};

inline SpectralMeasure nu_measure(int degree, const QuadratureRule& rule) {
    return SpectralMeasure(degree, {}, ConstantDensity{1.0}, rule);
}

inline SpectralMeasure dirac_measure(int degree, double location, double mass,
                                     const QuadratureRule& rule) {
    return SpectralMeasure(degree, {Atom{location, mass}}, ConstantDensity{0.0}, rule);
}

inline SpectralMeasure gauss_markov_measure(int degree, double rho, const QuadratureRule& rule) {
    return SpectralMeasure(degree, {}, GaussMarkovDensity{rho}, rule);
}

inline SpectralMeasure gff_measure(int degree, const QuadratureRule& rule) {
    return SpectralMeasure(degree, {}, GreenFunctionDensity{}, rule);
}

inline double total_mass(const SpectralMeasure& mu, const QuadratureRule& rule) {
    double mass = 0.0;
    for (const Atom& a : mu.atoms()) mass += a.mass;
    return mass + integrate(rule, [&](double t) { return mu.density_at(t); });
}

/// k-th moment: sum over atoms of mass*location^k plus integral t^k * density dnu.
inline double moment(const SpectralMeasure& mu, int k, const QuadratureRule& rule) {
    if (k < 0) throw std::invalid_argument("moment: k must be >= 0");
    auto pow_k = [k](double t) {
        double p = 1.0;
        for (int i = 0; i < k; ++i) p *= t;
        return p;
    };
    double acc = 0.0;
    for (const Atom& a : mu.atoms()) acc += a.mass * pow_k(a.location);
    return acc + integrate(rule, [&](double t) { return pow_k(t) * mu.density_at(t); });
}

namespace detail {

inline void require_same_degree(const SpectralMeasure& a, const SpectralMeasure& b,
                                const char* where) {
    if (a.degree() != b.degree()) {
        throw std::invalid_argument(std::string(where) + ": degree mismatch (" +
                                    std::to_string(a.degree()) + " vs " +
                                    std::to_string(b.degree()) + ")");
    }
}

} // namespace detail

/// Total variation distance. The atomic and absolutely continuous parts are
/// mutually singular (nu has no atoms), so the two contributions add:
/// 1/2 * [ sum over atom locations |m1 - m2| + integral |f1 - f2| dnu ].
inline double tv_distance(const SpectralMeasure& mu1, const SpectralMeasure& mu2,
                          const QuadratureRule& rule) {
    detail::require_same_degree(mu1, mu2, "tv_distance");
    double atom_part = 0.0;
    const auto& a1 = mu1.atoms();
    const auto& a2 = mu2.atoms();
    std::size_t i = 0, j = 0;
    while (i < a1.size() || j < a2.size()) {
        if (j == a2.size() || (i < a1.size() && a1[i].location < a2[j].location)) {
            atom_part += a1[i++].mass;
        } else if (i == a1.size() || a2[j].location < a1[i].location) {
            atom_part += a2[j++].mass;
        } else {
            atom_part += std::abs(a1[i].mass - a2[j].mass);
            ++i, ++j;
        }
    }
    const double ac_part =
        integrate(rule, [&](double t) { return std::abs(mu1.density_at(t) - mu2.density_at(t)); });
    return 0.5 * (atom_part + ac_part);
}

/// Hellinger affinity: sum over common atoms of sqrt(m1*m2) plus
/// integral sqrt(f1*f2) dnu. Upper-bounds |E(X_o Y_o)| over all invariant
/// couplings of processes with these spectral measures; it is 0 exactly when
/// the measures are mutually singular.
inline double hellinger_affinity(const SpectralMeasure& mu1, const SpectralMeasure& mu2,
                                 const QuadratureRule& rule) {
    detail::require_same_degree(mu1, mu2, "hellinger_affinity");
    double atom_part = 0.0;
    const auto& a1 = mu1.atoms();
    const auto& a2 = mu2.atoms();
    std::size_t i = 0, j = 0;
    while (i < a1.size() && j < a2.size()) {
        if (a1[i].location < a2[j].location) {
            ++i;
        } else if (a2[j].location < a1[i].location) {
            ++j;
        } else {
            atom_part += std::sqrt(a1[i].mass * a2[j].mass);
            ++i, ++j;
        }
    }
    if (density_is_zero(mu1.density()) || density_is_zero(mu2.density())) return atom_part;
    const double ac_part =
        integrate(rule, [&](double t) { return std::sqrt(mu1.density_at(t) * mu2.density_at(t)); });
    return atom_part + ac_part;
}

enum class Classification {
    FactorOfIID,   ///< absolutely continuous w.r.t. nu
    WeakLimitOnly, ///< atoms present, but supported inside the tree spectrum
    NotWeakLimit,  ///< some atom outside the tree spectrum
};

inline const char* to_string(Classification c) {
    switch (c) {
        case Classification::FactorOfIID: return "FactorOfIID";
        case Classification::WeakLimitOnly: return "WeakLimitOnly";
        case Classification::NotWeakLimit: return "NotWeakLimit";
    }
    return "?";
}

/// Classifies which realization family admits mu as its spectral measure.
/// Absolute continuity w.r.t. nu is decided structurally: the representation
/// allows atoms only as the singular part, so mu << nu iff there are no
/// atoms. Support containment uses the spectral radius 2*sqrt(d-1).
inline Classification classify(const SpectralMeasure& mu) {
    if (mu.is_structurally_zero()) {
        throw std::invalid_argument("classify: the zero measure is degenerate");
    }
    if (mu.atoms().empty()) return Classification::FactorOfIID;
    const double radius = TreeModel(mu.degree()).spectral_radius();
    for (const Atom& a : mu.atoms()) {
        if (std::abs(a.location) > radius) return Classification::NotWeakLimit;
    }
    return Classification::WeakLimitOnly;
}

} // namespace treespec

#endif
