#ifndef TREESPEC_IO_HPP
#define TREESPEC_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "treespec/measure.hpp"
#include "treespec/transforms.hpp"

namespace treespec {

/// Parsed form of a measure specification document: degree, atoms, density.
/// Kept separate from SpectralMeasure so a document can be read and
/// re-serialized without a quadrature rule.
struct MeasureSpecDoc {
    int degree = 0;
    std::vector<Atom> atoms;
    DensitySpec density = ConstantDensity{0.0};

    friend bool operator==(const MeasureSpecDoc& a, const MeasureSpecDoc& b) {
        return a.degree == b.degree && a.atoms == b.atoms && a.density == b.density;
    }
};

namespace io_detail {

using nlohmann::json;

inline const json& require_field(const json& j, const char* field, const char* where) {
    auto it = j.find(field);
    if (it == j.end()) {
        throw std::invalid_argument(std::string("measure spec: missing field \"") + field +
                                    "\" in " + where);
    }
    return *it;
}

inline std::vector<double> coeff_list(const json& j, const char* where) {
    if (!j.is_array()) {
        throw std::invalid_argument(std::string("measure spec: \"coefficients\" in ") + where +
                                    " must be an array of numbers");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) {
            throw std::invalid_argument(std::string("measure spec: non-numeric coefficient in ") +
                                        where);
        }
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace io_detail

/// Parses a measure specification document:
///
///   {
///     "degree": 3,
///     "atoms": [{"location": 2.0, "mass": 1.0}],
///     "density": {"kind": "gauss_markov", "rho": 0.5}
///   }
///
/// density kinds: "constant" (value), "gauss_markov" (rho), "green",
/// "dunau_series" (coefficients), "squared_dunau_series" (coefficients).
/// "atoms" may be omitted (none) and "density" may be omitted (zero).
inline MeasureSpecDoc parse_measure_spec(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("measure spec: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("measure spec: document must be an object");

    MeasureSpecDoc doc;
    const json& deg = io_detail::require_field(j, "degree", "document");
    if (!deg.is_number_integer()) {
        throw std::invalid_argument("measure spec: \"degree\" must be an integer");
    }
    doc.degree = deg.get<int>();

    if (auto it = j.find("atoms"); it != j.end()) {
        if (!it->is_array()) throw std::invalid_argument("measure spec: \"atoms\" must be an array");
        for (const auto& a : *it) {
            Atom atom;
            atom.location = io_detail::require_field(a, "location", "atom").get<double>();
            atom.mass = io_detail::require_field(a, "mass", "atom").get<double>();
            doc.atoms.push_back(atom);
        }
    }

    if (auto it = j.find("density"); it != j.end()) {
        const json& dj = *it;
        const std::string kind = io_detail::require_field(dj, "kind", "density").get<std::string>();
        if (kind == "constant") {
            doc.density = ConstantDensity{io_detail::require_field(dj, "value", "density").get<double>()};
        } else if (kind == "gauss_markov") {
            doc.density = GaussMarkovDensity{io_detail::require_field(dj, "rho", "density").get<double>()};
        } else if (kind == "green") {
            doc.density = GreenFunctionDensity{};
        } else if (kind == "dunau_series") {
            doc.density = DunauSeriesDensity{
                io_detail::coeff_list(io_detail::require_field(dj, "coefficients", "density"), "density")};
        } else if (kind == "squared_dunau_series") {
            doc.density = SquaredDunauSeriesDensity{
                io_detail::coeff_list(io_detail::require_field(dj, "coefficients", "density"), "density")};
        } else {
            throw std::invalid_argument("measure spec: unknown density kind \"" + kind + "\"");
        }
    }
    return doc;
}

inline std::string serialize_measure_spec(const MeasureSpecDoc& doc) {
    using nlohmann::json;
    json j;
    j["degree"] = doc.degree;
    json atoms = json::array();
    for (const Atom& a : doc.atoms) atoms.push_back({{"location", a.location}, {"mass", a.mass}});
    j["atoms"] = atoms;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ConstantDensity>) {
                j["density"] = {{"kind", "constant"}, {"value", s.value}};
            } else if constexpr (std::is_same_v<T, GaussMarkovDensity>) {
                j["density"] = {{"kind", "gauss_markov"}, {"rho", s.rho}};
            } else if constexpr (std::is_same_v<T, GreenFunctionDensity>) {
                j["density"] = {{"kind", "green"}};
            } else if constexpr (std::is_same_v<T, DunauSeriesDensity>) {
                j["density"] = {{"kind", "dunau_series"}, {"coefficients", s.coefficients}};
            } else {
                j["density"] = {{"kind", "squared_dunau_series"}, {"coefficients", s.coefficients}};
            }
        },
        doc.density);
    return j.dump(2) + "\n";
}

inline MeasureSpecDoc load_measure_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open measure spec file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_measure_spec(buf.str());
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) {
        for (int prec = 1; prec <= 16; ++prec) {
            char probe[40];
            std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
            std::sscanf(probe, "%lf", &back);
            if (back == v) return probe;
        }
    }
    return buf;
}

/// Coefficient export: a commented header with degree, radius and the
/// Parseval residual, then one row per distance: n, a_n, |S_n|.
inline std::string format_coefficients(const RadialCoefficients& coeffs,
                                       double truncation_error) {
    std::ostringstream out;
    out << "# linear-factor radial coefficients\n";
    out << "# degree " << coeffs.degree << "\n";
    out << "# radius " << coeffs.radius() << "\n";
    out << "# truncation_error " << format_double(truncation_error) << "\n";
    out << "# n a_n sphere_size\n";
    for (std::size_t n = 0; n < coeffs.values.size(); ++n) {
        out << n << " " << format_double(coeffs.values[n]) << " "
            << format_double(sphere_size_real(coeffs.degree, int(n))) << "\n";
    }
    return out.str();
}

/// Parses the format written by format_coefficients. If truncation_out is
/// non-null it receives the header's truncation_error.
inline RadialCoefficients parse_coefficients(const std::string& text,
                                             double* truncation_out = nullptr) {
    std::istringstream in(text);
    std::string line;
    int degree = 0, radius = -1;
    bool have_degree = false;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "degree") {
                ls >> degree;
                have_degree = true;
            } else if (key == "radius") {
                ls >> radius;
            } else if (key == "truncation_error" && truncation_out) {
                ls >> *truncation_out;
            }
            continue;
        }
        std::istringstream ls(line);
        long n = 0;
        double a = 0.0;
        if (!(ls >> n >> a)) {
            throw std::invalid_argument("coefficient file: malformed row: " + line);
        }
        if (n != long(values.size())) {
            throw std::invalid_argument("coefficient file: rows out of order at n = " +
                                        std::to_string(n));
        }
        values.push_back(a);
    }
    if (!have_degree) throw std::invalid_argument("coefficient file: missing degree header");
    if (values.empty()) throw std::invalid_argument("coefficient file: no coefficient rows");
    if (radius >= 0 && radius != int(values.size()) - 1) {
        throw std::invalid_argument("coefficient file: radius header does not match rows");
    }
    return RadialCoefficients{degree, std::move(values)};
}

inline RadialCoefficients load_coefficients(const std::string& path,
                                            double* truncation_out = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open coefficients file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_coefficients(buf.str(), truncation_out);
}

} // namespace treespec

#endif
