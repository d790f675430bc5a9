#ifndef TREESPEC_CLI_APP_HPP
#define TREESPEC_CLI_APP_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "treespec/dbar.hpp"
#include "treespec/dunau.hpp"
#include "treespec/io.hpp"
#include "treespec/measure.hpp"
#include "treespec/quadrature.hpp"
#include "treespec/simulate.hpp"
#include "treespec/transforms.hpp"
#include "treespec/tree_model.hpp"

namespace treespec::cli {

// Exit statuses: 0 success, 1 check failure, 2 usage/parse error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

inline void emit(const std::string& report, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << report;
    } else {
        std::ofstream f(out_path);
        if (!f) throw std::invalid_argument("cannot open output file: " + out_path);
        f << report;
    }
}

struct InlineMeasureOpts {
    std::string spec_path;
    std::string density_kind;
    double rho = 0.0;
    bool rho_set = false;
    double value = 1.0;
    std::vector<double> coefficients;
    std::vector<std::string> atom_strings;
    int degree = 0;
};

inline void add_measure_options(CLI::App* cmd, InlineMeasureOpts& opts, bool with_atoms) {
    cmd->add_option("--spec", opts.spec_path, "measure specification file (JSON)");
    cmd->add_option("--d", opts.degree, "tree degree (for inline specs)");
    cmd->add_option("--density", opts.density_kind,
                    "inline density kind: constant | gauss-markov | green | dunau-series | "
                    "squared-dunau-series");
    cmd->add_option("--rho", opts.rho, "parameter for gauss-markov density")
        ->each([&opts](const std::string&) { opts.rho_set = true; });
    cmd->add_option("--value", opts.value, "value for constant density");
    cmd->add_option("--coefficients", opts.coefficients,
                    "series coefficients c_0,c_1,... for dunau-series kinds")
        ->delimiter(',');
    if (with_atoms) {
        cmd->add_option("--atom", opts.atom_strings,
                        "inline atom as location,mass (repeatable)");
    }
}

inline MeasureSpecDoc resolve_measure(const InlineMeasureOpts& opts) {
    if (!opts.spec_path.empty()) return load_measure_spec(opts.spec_path);
    if (opts.degree == 0) {
        throw std::invalid_argument("inline measure spec needs --d (or use --spec FILE)");
    }
    MeasureSpecDoc doc;
    doc.degree = opts.degree;
    for (const std::string& s : opts.atom_strings) {
        Atom a;
        if (std::sscanf(s.c_str(), "%lf,%lf", &a.location, &a.mass) != 2) {
            throw std::invalid_argument("malformed --atom \"" + s + "\" (want location,mass)");
        }
        doc.atoms.push_back(a);
    }
    if (opts.density_kind.empty()) {
        // no density flag: purely atomic if atoms were given, otherwise nu itself
        doc.density = ConstantDensity{opts.atom_strings.empty() ? 1.0 : 0.0};
    } else if (opts.density_kind == "constant") {
        doc.density = ConstantDensity{opts.value};
    } else if (opts.density_kind == "gauss-markov") {
        if (!opts.rho_set) throw std::invalid_argument("gauss-markov density needs --rho");
        doc.density = GaussMarkovDensity{opts.rho};
    } else if (opts.density_kind == "green") {
        doc.density = GreenFunctionDensity{};
    } else if (opts.density_kind == "dunau-series") {
        doc.density = DunauSeriesDensity{opts.coefficients};
    } else if (opts.density_kind == "squared-dunau-series") {
        doc.density = SquaredDunauSeriesDensity{opts.coefficients};
    } else {
        throw std::invalid_argument("unknown density kind \"" + opts.density_kind + "\"");
    }
    return doc;
}

inline const char* classification_reason(Classification c) {
    switch (c) {
        case Classification::FactorOfIID:
            return "no atoms: the measure is absolutely continuous with respect to the "
                   "tree's spectral measure";
        case Classification::WeakLimitOnly:
            return "atoms present, all inside the tree spectrum [-2sqrt(d-1), 2sqrt(d-1)]: "
                   "support containment holds but absolute continuity fails";
        case Classification::NotWeakLimit:
            return "an atom lies outside the tree spectrum [-2sqrt(d-1), 2sqrt(d-1)]";
    }
    return "";
}

} // namespace detail

// ---------------------------------------------------------------------------

inline int cmd_spectrum(int degree, int moments, bool density, int points, int nodes,
                        const std::string& format, const std::string& out_path,
                        std::ostream& out) {
    const TreeModel model(degree);
    std::ostringstream rep;
    nlohmann::json doc;
    doc["command"] = "spectrum";
    doc["degree"] = degree;

    if (density) {
        if (points < 2) throw std::invalid_argument("--points must be >= 2");
        const double radius = model.spectral_radius();
        nlohmann::json rows = nlohmann::json::array();
        rep << "# kesten-mckay density d=" << degree << "\n";
        rep << "t h_t\n";
        for (int i = 0; i < points; ++i) {
            const double t = -radius + 2.0 * radius * double(i) / double(points - 1);
            const double h = kesten_mckay_density(model, t);
            rep << format_double(t) << " " << format_double(h) << "\n";
            rows.push_back({{"t", t}, {"h", h}});
        }
        doc["density"] = rows;
    } else {
        if (moments < 0) throw std::invalid_argument("--moments must be >= 0");
        const QuadratureRule rule = build_quadrature(model, nodes);
        nlohmann::json rows = nlohmann::json::array();
        rep << "# spectrum moments d=" << degree << " nodes=" << nodes << "\n";
        rep << "k quadrature walk_count abs_err\n";
        for (int k = 0; k <= moments; ++k) {
            const double q = integrate(rule, [&](double t) {
                double p = 1.0;
                for (int i = 0; i < k; ++i) p *= t;
                return p;
            });
            const std::uint64_t w = closed_walk_count(model, k);
            const double err = std::abs(q - double(w));
            rep << k << " " << format_double(q) << " " << w << " " << format_double(err) << "\n";
            rows.push_back({{"k", k}, {"quadrature", q}, {"walk_count", w}, {"abs_err", err}});
        }
        doc["moments"] = rows;
    }
    detail::emit(format == "doc" ? doc.dump(2) + "\n" : rep.str(), out_path, out);
    return kExitOk;
}

inline int cmd_synthesize(const detail::InlineMeasureOpts& opts, int radius, int nodes,
                          const std::string& out_path, std::ostream& out, std::ostream& err) {
    const MeasureSpecDoc doc = detail::resolve_measure(opts);
    const QuadratureRule rule = build_quadrature(TreeModel(doc.degree), nodes);
    const SpectralMeasure mu(doc.degree, doc.atoms, doc.density, rule);
    const Classification cls = classify(mu);
    if (cls != Classification::FactorOfIID) {
        err << "refusing to synthesize: classification: " << to_string(cls) << " — "
            << detail::classification_reason(cls)
            << "; only absolutely continuous spectral measures admit a linear "
               "factor-of-i.i.d. realization\n";
        return kExitCheckFailed;
    }
    const RadialCoefficients coeffs = synthesize_coefficients(doc.density, radius, rule);
    const double trunc = truncation_error(doc.density, radius, rule);
    detail::emit(format_coefficients(coeffs, trunc), out_path, out);
    return kExitOk;
}

inline int cmd_simulate(const std::string& process, int degree, double rho,
                        const std::string& coeffs_path, int depth, int max_distance,
                        std::uint64_t n_samples, std::uint64_t seed, int nodes, unsigned threads,
                        const std::string& format, const std::string& out_path,
                        std::ostream& out) {
    if (max_distance < 0) throw std::invalid_argument("--max-distance must be >= 0");
    if (n_samples < 2) throw std::invalid_argument("--samples must be >= 2");

    FieldSampler sampler;
    std::vector<double> analytic(std::size_t(max_distance) + 1, 0.0);

    if (process == "linear-factor") {
        if (coeffs_path.empty()) {
            throw std::invalid_argument("--process linear-factor needs --coeffs FILE");
        }
        RadialCoefficients coeffs = load_coefficients(coeffs_path);
        degree = coeffs.degree;
        const int R = coeffs.radius();
        if (depth == 0) depth = R + max_distance;
        if (depth - R < max_distance) {
            throw std::invalid_argument(
                "depth " + std::to_string(depth) + " leaves valid radius " +
                std::to_string(depth - R) + " < max distance " + std::to_string(max_distance));
        }
        const QuadratureRule rule = build_quadrature(TreeModel(degree), nodes);
        const SpectralMeasure mu(degree, {}, SquaredDunauSeriesDensity{coeffs.values}, rule);
        for (int n = 0; n <= max_distance; ++n) {
            analytic[std::size_t(n)] = covariance_from_measure(mu, n, rule);
        }
        // exact-law root-window representation of the depth-`depth` pipeline
        sampler = LinearFactorWindowSampler(std::move(coeffs), depth - R, seed);
    } else {
        if (degree == 0) throw std::invalid_argument("--d is required for this process");
        if (depth == 0) depth = max_distance;
        if (depth < max_distance) {
            throw std::invalid_argument("--depth must be >= --max-distance");
        }
        TruncatedTree tree = build_tree(degree, depth);
        if (process == "iid") {
            sampler = make_iid_sampler(std::move(tree), seed);
            analytic[0] = 1.0;
        } else if (process == "gauss-markov") {
            sampler = make_gauss_markov_sampler(std::move(tree), rho, seed);
            for (int n = 0; n <= max_distance; ++n) analytic[std::size_t(n)] = std::pow(rho, n);
        } else if (process == "ising") {
            sampler = make_branching_markov_sampler(std::move(tree), make_ising_spec(rho), seed);
            for (int n = 0; n <= max_distance; ++n) analytic[std::size_t(n)] = std::pow(rho, n);
        } else {
            throw std::invalid_argument("unknown process \"" + process + "\"");
        }
    }

    std::ostringstream rep;
    rep << "# simulate process=" << process << " d=" << degree << " depth=" << depth
        << " samples=" << n_samples << " seed=" << seed << "\n";
    rep << "n estimate std_error analytic pass\n";
    nlohmann::json doc;
    doc["command"] = "simulate";
    doc["process"] = process;
    doc["degree"] = degree;
    doc["rows"] = nlohmann::json::array();
    bool all_pass = true;
    for (int n = 0; n <= max_distance; ++n) {
        const MonteCarloEstimate est = empirical_covariance(sampler, n, n_samples, threads);
        const double a = analytic[std::size_t(n)];
        const bool pass = std::abs(est.estimate - a) <= 4.0 * est.std_error;
        all_pass = all_pass && pass;
        rep << n << " " << format_double(est.estimate) << " " << format_double(est.std_error)
            << " " << format_double(a) << " " << (pass ? "true" : "false") << "\n";
        doc["rows"].push_back({{"n", n},
                               {"estimate", est.estimate},
                               {"std_error", est.std_error},
                               {"analytic", a},
                               {"pass", pass}});
    }
    detail::emit(format == "doc" ? doc.dump(2) + "\n" : rep.str(), out_path, out);
    return all_pass ? kExitOk : kExitCheckFailed;
}

inline int cmd_dbar(const std::string& spec_x, const std::string& spec_y, int nodes,
                    const std::string& format, const std::string& out_path, std::ostream& out) {
    const MeasureSpecDoc dx = load_measure_spec(spec_x);
    const MeasureSpecDoc dy = load_measure_spec(spec_y);
    if (dx.degree != dy.degree) {
        throw std::invalid_argument("degree mismatch between specs: " +
                                    std::to_string(dx.degree) + " vs " +
                                    std::to_string(dy.degree));
    }
    const QuadratureRule rule = build_quadrature(TreeModel(dx.degree), nodes);
    const SpectralMeasure mx(dx.degree, dx.atoms, dx.density, rule);
    const SpectralMeasure my(dy.degree, dy.atoms, dy.density, rule);
    const double var_x = total_mass(mx, rule);
    const double var_y = total_mass(my, rule);
    const double tv = tv_distance(mx, my, rule);
    const double affinity = coupling_product_bound(mx, my, rule);
    const double bound = dbar_lower_bound(var_x, var_y, tv);
    const bool orthogonal = affinity == 0.0;

    std::ostringstream rep;
    rep << "# dbar d=" << dx.degree << " nodes=" << nodes << "\n";
    rep << "var_x " << format_double(var_x) << "\n";
    rep << "var_y " << format_double(var_y) << "\n";
    rep << "tv_distance " << format_double(tv) << "\n";
    rep << "coupling_product_bound " << format_double(affinity) << "\n";
    rep << "dbar_lower_bound " << format_double(bound) << "\n";
    rep << "orthogonal_in_every_coupling " << (orthogonal ? "true" : "false") << "\n";
    nlohmann::json doc{{"command", "dbar"},
                       {"degree", dx.degree},
                       {"var_x", var_x},
                       {"var_y", var_y},
                       {"tv_distance", tv},
                       {"coupling_product_bound", affinity},
                       {"dbar_lower_bound", bound},
                       {"orthogonal_in_every_coupling", orthogonal}};
    detail::emit(format == "doc" ? doc.dump(2) + "\n" : rep.str(), out_path, out);
    return kExitOk;
}

inline int cmd_classify(const detail::InlineMeasureOpts& opts, int nodes,
                        const std::string& format, const std::string& out_path,
                        std::ostream& out) {
    const MeasureSpecDoc doc = detail::resolve_measure(opts);
    const QuadratureRule rule = build_quadrature(TreeModel(doc.degree), nodes);
    const SpectralMeasure mu(doc.degree, doc.atoms, doc.density, rule);
    const Classification cls = classify(mu);

    std::ostringstream rep;
    rep << "classification " << to_string(cls) << "\n";
    rep << "criterion " << detail::classification_reason(cls) << "\n";
    nlohmann::json jd{{"command", "classify"},
                      {"degree", doc.degree},
                      {"classification", to_string(cls)},
                      {"criterion", detail::classification_reason(cls)}};
    detail::emit(format == "doc" ? jd.dump(2) + "\n" : rep.str(), out_path, out);
    return kExitOk;
}

// ---------------------------------------------------------------------------

/// Parses and runs one CLI invocation. args excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"spectral measures and Gaussian processes on regular trees"};
    app.require_subcommand(1);

    std::string format = "table", out_path;
    int nodes = 4096;
    app.add_option("--format", format, "output format: table | doc")
        ->check(CLI::IsMember({"table", "doc"}));
    app.add_option("--out", out_path, "write the report to this path instead of stdout");
    app.add_option("--nodes", nodes, "quadrature node count")->check(CLI::PositiveNumber);

    // spectrum
    auto* spectrum = app.add_subcommand("spectrum", "Kesten-McKay measure: density and moments");
    int sp_d = 0, sp_moments = 10, sp_points = 100;
    bool sp_density = false;
    spectrum->add_option("--d", sp_d, "tree degree")->required();
    spectrum->add_option("--moments", sp_moments, "emit moments up to this order");
    spectrum->add_flag("--density", sp_density, "emit density samples instead of moments");
    spectrum->add_option("--points", sp_points, "number of density sample points");

    // synthesize
    auto* synth = app.add_subcommand(
        "synthesize", "linear factor-of-i.i.d. coefficients for a target spectral density");
    detail::InlineMeasureOpts synth_opts;
    detail::add_measure_options(synth, synth_opts, /*with_atoms=*/true);
    int synth_radius = 40;
    synth->add_option("--radius", synth_radius, "truncation radius R");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo covariance of a process on the tree");
    std::string sim_process, sim_coeffs;
    int sim_d = 0, sim_depth = 0, sim_maxdist = 4;
    double sim_rho = 0.0;
    std::uint64_t sim_samples = 10000, sim_seed = 0;
    unsigned sim_threads = 1;
    sim->add_option("--process", sim_process, "iid | gauss-markov | ising | linear-factor")
        ->required();
    sim->add_option("--d", sim_d, "tree degree");
    sim->add_option("--rho", sim_rho, "correlation parameter");
    sim->add_option("--coeffs", sim_coeffs, "coefficients file from `synthesize`");
    sim->add_option("--depth", sim_depth, "truncated tree depth");
    sim->add_option("--max-distance", sim_maxdist, "report covariances up to this distance");
    sim->add_option("--samples", sim_samples, "Monte Carlo sample count");
    sim->add_option("--seed", sim_seed, "base seed");
    sim->add_option("--threads", sim_threads, "worker threads (results are thread-count independent)");

    // dbar
    auto* dbar = app.add_subcommand("dbar", "distance bounds between two spectral measures");
    std::string dbar_x, dbar_y;
    dbar->add_option("--spec-x", dbar_x, "first measure spec file")->required();
    dbar->add_option("--spec-y", dbar_y, "second measure spec file")->required();

    // classify
    auto* cls = app.add_subcommand("classify", "which realization family admits this measure");
    detail::InlineMeasureOpts cls_opts;
    detail::add_measure_options(cls, cls_opts, /*with_atoms=*/true);

    std::vector<const char*> argv;
    argv.push_back("treespec");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (spectrum->parsed()) {
            return cmd_spectrum(sp_d, sp_moments, sp_density, sp_points, nodes, format, out_path,
                                out);
        }
        if (synth->parsed()) {
            return cmd_synthesize(synth_opts, synth_radius, nodes, out_path, out, err);
        }
        if (sim->parsed()) {
            return cmd_simulate(sim_process, sim_d, sim_rho, sim_coeffs, sim_depth, sim_maxdist,
                                sim_samples, sim_seed, nodes, sim_threads, format, out_path, out);
        }
        if (dbar->parsed()) {
            return cmd_dbar(dbar_x, dbar_y, nodes, format, out_path, out);
        }
        if (cls->parsed()) {
            return cmd_classify(cls_opts, nodes, format, out_path, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    err << "error: no subcommand\n";
    return kExitUsage;
}

} // namespace treespec::cli

#endif
