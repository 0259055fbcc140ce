// edgeshift command-line entry point.
//
// Worker count for parallel sections: EDGESHIFT_WORKERS (defaults to the
// hardware thread count).

#include "edgeshift/edgeshift.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

using namespace edgeshift;

namespace {

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        const double x = std::stod(item, &pos);
        if (pos != item.size()) throw std::invalid_argument("not a number: '" + item + "'");
        out.push_back(x);
    }
    return out;
}

struct Options {
    RunConfig cfg;
    std::string eps;
    std::string W;
    std::string theta;
    std::string summary_path;
    std::string verify_suites;
    std::optional<std::uint64_t> seed;
    bool no_shift = false;
};

void add_model_options(CLI::App* app, Options& o) {
    app->add_option("-m,--model", o.cfg.model, "preset (anderson, dipole, quartic, alloy) or model JSON path")
        ->capture_default_str();
    app->add_option("--dimension", o.cfg.dimension, "space dimension for presets")->capture_default_str();
    app->add_option("--period", o.cfg.period, "period N for presets");
    app->add_option("--W", o.W, "alloy on-site potential, comma separated (N^d values)");
    app->add_option("--s-minus", o.cfg.s_minus, "lower end of the coupling support");
    app->add_option("--s-plus", o.cfg.s_plus, "upper end of the coupling support");
    app->add_option("--regime", o.cfg.regime, "sign_changing or positive");
    app->add_option("--bz-grid", o.cfg.scan.grid_per_dim, "Brillouin-zone grid points per dimension")->capture_default_str();
    app->add_option("--refinements", o.cfg.scan.refinements, "bisection levels per candidate")->capture_default_str();
    app->add_option("--tol-shift", o.cfg.tol.tol_shift)->capture_default_str();
    app->add_option("--tol-theta", o.cfg.tol.tol_theta)->capture_default_str();
    app->add_option("--tol-deg", o.cfg.tol.tol_deg_rel, "relative degeneracy tolerance")->capture_default_str();
    app->add_option("--tol-case", o.cfg.tol.tol_case_rel)->capture_default_str();
}

void add_output_options(CLI::App* app, Options& o) {
    app->add_option("-o,--output", o.cfg.output_path, "write the main output here instead of stdout");
    app->add_option("--summary", o.summary_path, "write the JSON summary here (default: stderr)");
}

void finalize(Options& o) {
    if (!o.eps.empty()) o.cfg.epsilons = parse_list(o.eps);
    if (!o.W.empty()) o.cfg.W = parse_list(o.W);
    if (o.seed) o.cfg.verify.seed = o.seed;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << text;
}

void emit_summary(const std::string& path, const json& j) {
    const std::string text = j.dump(2) + "\n";
    if (path.empty()) {
        std::cerr << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << text;
}

Model prepared_model(const Options& o, bool shift = true) {
    Model m = resolve_model(o.cfg);
    if (shift) m.h = shift_to_zero(m.h, o.cfg.scan.grid_per_dim, o.cfg.tol, o.cfg.scan.refinements);
    return m;
}

int cmd_validate(Options& o) {
    const Model m = resolve_model(o.cfg);
    const auto rep = validate_hypotheses(m, o.cfg.tol, o.cfg.scan);
    json checks = json::array();
    for (const auto& c : rep.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"witness", c.witness}});
    emit(o.cfg.output_path, json{{"model", m.name}, {"checks", checks}, {"passed", rep.all_passed()}}.dump(2) + "\n");
    return rep.all_passed() ? 0 : 1;
}

int cmd_floquet_scan(Options& o) {
    const Model m = prepared_model(o, !o.no_shift);
    const auto set = scan_theta_set(m.h, o.cfg.scan, o.cfg.tol);
    const int d = m.h.geometry().dimension();
    std::ostringstream csv;
    csv << theta_header(d) << "lambda_min,p,gap,kind\n";
    auto row = [&](const Theta& t, const char* kind) {
        const auto spec = fiber_eigh(build_floquet(m.h, t));
        const double norm = spec.eigenvalues.cwiseAbs().maxCoeff();
        const double tol = o.cfg.tol.deg(norm);
        int p = 0;
        while (p < spec.eigenvalues.size() && spec.eigenvalues(p) - spec.eigenvalues(0) <= tol) ++p;
        csv << theta_cells(t) << csv_num(spec.eigenvalues(0)) << ',' << p << ','
            << (p < spec.eigenvalues.size() ? csv_num(spec.eigenvalues(p) - spec.eigenvalues(0)) : std::string()) << ','
            << kind << '\n';
    };
    for (const auto& [t, v] : set.grid) row(t, "grid");
    for (const auto& t : set.minimizers) row(t, "minimizer");
    emit(o.cfg.output_path, csv.str());
    emit_summary(o.summary_path, {{"E0", set.E0}, {"resolution", set.resolution}, {"minimizers", set.minimizers},
                                  {"energy_shift", m.h.energy_shift()}});
    return 0;
}

int cmd_fiber(Options& o) {
    const Model m = prepared_model(o, !o.no_shift);
    Theta theta = parse_list(o.theta);
    if (theta.empty()) theta.assign(m.h.geometry().dimension(), 0.0);
    const auto spec = fiber_eigh(build_floquet(m.h, theta));
    json vecs = json::array();
    for (Eigen::Index j = 0; j < spec.eigenvectors.cols(); ++j) {
        json col = json::array();
        for (Eigen::Index i = 0; i < spec.eigenvectors.rows(); ++i)
            col.push_back({spec.eigenvectors(i, j).real(), spec.eigenvectors(i, j).imag()});
        vecs.push_back(std::move(col));
    }
    json out{{"theta", theta},
             {"eigenvalues", std::vector<double>(spec.eigenvalues.data(), spec.eigenvalues.data() + spec.eigenvalues.size())},
             {"eigenvectors", std::move(vecs)},
             {"energy_shift", m.h.energy_shift()}};
    emit(o.cfg.output_path, out.dump(2) + "\n");
    return 0;
}

int cmd_coefficients(Options& o) {
    o.cfg.validate();
    const auto a = analyze(resolve_model(o.cfg), o.cfg.scan, o.cfg.tol);
    json arr = json::array();
    for (const auto& md : a.minimizers) arr.push_back(coefficients_json(md.coeffs, o.cfg.epsilons));
    emit(o.cfg.output_path, arr.dump(2) + "\n");
    return 0;
}

int cmd_verify(Options& o, const std::string& suite) {
    if (suite == "montecarlo" && o.cfg.verify.samples <= 0) o.cfg.verify.samples = 100;
    o.cfg.verify.suites = {suite};
    o.cfg.validate();
    SuiteResult r;
    if (suite == "quartic") {
        r = suite_quartic(o.cfg.epsilons, o.cfg.verify.xi);
    } else {
        if (suite == "kirsch-simon" && o.cfg.model == "anderson") o.cfg.model = "alloy";
        const auto a = analyze(resolve_model(o.cfg), o.cfg.scan, o.cfg.tol);
        if (suite == "fiber-sweep")
            r = suite_fiber_sweep(a, o.cfg.epsilons);
        else if (suite == "montecarlo")
            r = suite_montecarlo(a, o.cfg.epsilons, o.cfg.verify);
        else
            r = suite_kirsch_simon(a, o.cfg.verify);
    }
    emit(o.cfg.output_path, r.csv);
    emit_summary(o.summary_path, {{"suite", r.name},
                                  {"config", to_json(o.cfg)},
                                  {"summary", r.summary},
                                  {"invariants", to_json(r.invariants)},
                                  {"passed", r.passed()}});
    return r.passed() ? 0 : 1;
}

int cmd_run(Options& o) {
    if (!o.verify_suites.empty()) {
        std::stringstream ss(o.verify_suites);
        std::string s;
        while (std::getline(ss, s, ','))
            if (!s.empty()) o.cfg.verify.suites.push_back(s);
    }
    const auto res = run_pipeline(o.cfg);
    if (o.cfg.format == "csv") {
        emit(o.cfg.output_path, res.csv);
        if (!o.summary_path.empty()) emit_summary(o.summary_path, res.report);
    } else {
        emit(o.cfg.output_path, res.report.dump(2) + "\n");
        if (!o.summary_path.empty()) emit_summary(o.summary_path, res.report);
    }
    return res.exit_status();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral-edge expansion coefficients for weakly disordered lattice operators"};
    app.require_subcommand(1);
    Options o;

    auto* validate = app.add_subcommand("validate", "check the standing hypotheses of a model (JSON)");
    add_model_options(validate, o);
    add_output_options(validate, o);

    auto* scan = app.add_subcommand("floquet-scan",
                                    "CSV over the zone grid and the minimizers: theta_i..., lambda_min, p, gap, kind");
    add_model_options(scan, o);
    add_output_options(scan, o);
    scan->add_flag("--no-shift", o.no_shift, "do not shift the spectrum bottom to 0");

    auto* fiber = app.add_subcommand("fiber", "full fiber spectrum at theta (JSON)");
    add_model_options(fiber, o);
    add_output_options(fiber, o);
    fiber->add_option("--theta", o.theta, "comma separated quasi-momentum (default 0)");
    fiber->add_flag("--no-shift", o.no_shift, "do not shift the spectrum bottom to 0");

    auto* coeffs = app.add_subcommand("coefficients", "edge coefficients per minimizer (JSON)");
    add_model_options(coeffs, o);
    add_output_options(coeffs, o);
    coeffs->add_option("--eps", o.eps, "comma separated coupling strengths for the bound");

    auto* verify = app.add_subcommand("verify", "numerical oracles (CSV on stdout, JSON summary)");
    verify->require_subcommand(1);
    auto* sweep = verify->add_subcommand(
        "fiber-sweep", "CSV: theta_i..., epsilon, value, q_star, predicted, lower_C, upper_C, case");
    auto* mc = verify->add_subcommand("montecarlo", "CSV: epsilon, seed, lambda_min (one row per torus sample)");
    auto* quartic = verify->add_subcommand("quartic", "CSV: epsilon, xi, n, value, target, meets_target");
    auto* ks = verify->add_subcommand("kirsch-simon", "CSV: theta_i..., dE, lower, upper, ok");
    for (auto* sub : {sweep, mc, quartic, ks}) {
        add_model_options(sub, o);
        add_output_options(sub, o);
        sub->add_option("--eps", o.eps, "comma separated coupling strengths");
    }
    mc->add_option("--L", o.cfg.verify.L, "torus side in cells")->capture_default_str();
    mc->add_option("--samples", o.cfg.verify.samples, "realizations per epsilon (default 100)");
    mc->add_option("--seed", o.seed, "base seed (required)")->required();
    mc->add_option("--sampler", o.cfg.verify.sampler, "endpoint or uniform")->capture_default_str();
    quartic->add_option("--xi", o.cfg.verify.xi, "exponent xi > 1/4")->capture_default_str();
    ks->add_option("--grid", o.cfg.verify.ks_grid, "grid points per dimension (0 = automatic)");
    ks->add_option("--factor", o.cfg.verify.ks_factor, "two_one_minus_cos, one_minus_cos or as_printed")
        ->capture_default_str();

    auto* run = app.add_subcommand("run", "full pipeline report");
    add_model_options(run, o);
    add_output_options(run, o);
    run->add_option("--eps", o.eps, "comma separated coupling strengths");
    run->add_option("--verify", o.verify_suites, "comma separated suites: fiber-sweep, montecarlo, quartic, kirsch-simon");
    run->add_option("--format", o.cfg.format, "json or csv")->capture_default_str();
    run->add_option("--L", o.cfg.verify.L, "torus side for montecarlo")->capture_default_str();
    run->add_option("--samples", o.cfg.verify.samples, "realizations per epsilon for montecarlo");
    run->add_option("--seed", o.seed, "base seed for montecarlo");
    run->add_option("--sampler", o.cfg.verify.sampler)->capture_default_str();
    run->add_option("--xi", o.cfg.verify.xi)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        finalize(o);
        if (validate->parsed()) return cmd_validate(o);
        if (scan->parsed()) return cmd_floquet_scan(o);
        if (fiber->parsed()) return cmd_fiber(o);
        if (coeffs->parsed()) return cmd_coefficients(o);
        if (run->parsed()) return cmd_run(o);
        for (auto* sub : {sweep, mc, quartic, ks})
            if (sub->parsed()) return cmd_verify(o, sub->get_name());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
