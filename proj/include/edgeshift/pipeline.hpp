#pragma once

// End-to-end run: validate -> shift -> scan -> ground spaces -> coefficients
// -> best bound per epsilon -> verification suites, collected into one report.
// Reports contain no timings or host data, so a config and seed always give
// the same bytes.

#include "edgeshift/model_io.hpp"
#include "edgeshift/perturbation.hpp"
#include "edgeshift/verification/box.hpp"
#include "edgeshift/verification/fiber_checks.hpp"
#include "edgeshift/verification/kirsch_simon.hpp"
#include "edgeshift/verification/quasiperiodic.hpp"

#include <sstream>

namespace edgeshift {

struct VerifyConfig {
    /// Any of "fiber-sweep", "montecarlo", "quartic", "kirsch-simon".
    std::vector<std::string> suites;
    int L = 64;
    int samples = 0;
    std::optional<std::uint64_t> seed;
    std::string sampler = "endpoint";
    double xi = 0.3;
    /// Centred-zone grid points per dimension for kirsch-simon (0 = 256 in d=1, 32 otherwise).
    int ks_grid = 0;
    std::string ks_factor = "two_one_minus_cos";
};

struct RunConfig {
    /// Preset name or path to a model JSON file.
    std::string model = "anderson";
    int dimension = 1;
    std::optional<int> period;
    std::vector<double> W;
    std::optional<double> s_minus, s_plus;
    std::optional<std::string> regime;
    std::vector<double> epsilons;
    ScanOptions scan;
    Tolerances tol;
    VerifyConfig verify;
    std::string format = "json";
    std::string output_path;

    /// Throws invalid_argument; sorts and deduplicates the epsilon list.
    void validate() {
        tol.check();
        for (double e : epsilons)
            if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument("config: epsilons must be positive and finite");
        std::sort(epsilons.begin(), epsilons.end());
        epsilons.erase(std::unique(epsilons.begin(), epsilons.end()), epsilons.end());
        if (scan.grid_per_dim < 2) throw std::invalid_argument("config: bz.grid_per_dim must be >= 2");
        if (scan.refinements < 0) throw std::invalid_argument("config: bz.refinements must be >= 0");
        if (format != "json" && format != "csv") throw std::invalid_argument("config: format must be csv or json");
        static const std::vector<std::string> known{"fiber-sweep", "montecarlo", "quartic", "kirsch-simon"};
        for (const auto& s : verify.suites)
            if (std::find(known.begin(), known.end(), s) == known.end())
                throw std::invalid_argument("config: unknown verification suite '" + s + "'");
        const bool mc = std::find(verify.suites.begin(), verify.suites.end(), "montecarlo") != verify.suites.end();
        if (mc && verify.samples <= 0) throw std::invalid_argument("config: montecarlo needs samples > 0");
        if (verify.samples > 0 && !verify.seed) throw std::invalid_argument("config: a seed is required when samples > 0");
        if (verify.L < 1) throw std::invalid_argument("config: L must be >= 1");
        sampler_from_string(verify.sampler);
        dispersion_from_string(verify.ks_factor);
        if (regime) regime_from_string(*regime);
    }
};

inline json theta_json(const Theta& t) { return json(t); }

inline json to_json(const RunConfig& c) {
    json j;
    j["model"] = c.model;
    j["dimension"] = c.dimension;
    j["period"] = c.period ? json(*c.period) : json(nullptr);
    j["W"] = c.W;
    j["s_minus"] = c.s_minus ? json(*c.s_minus) : json(nullptr);
    j["s_plus"] = c.s_plus ? json(*c.s_plus) : json(nullptr);
    j["regime"] = c.regime ? json(*c.regime) : json(nullptr);
    j["epsilon_list"] = c.epsilons;
    j["bz"] = {{"grid_per_dim", c.scan.grid_per_dim},
               {"refinements", c.scan.refinements},
               {"max_extra_levels", c.scan.max_extra_levels},
               {"max_candidates", c.scan.max_candidates}};
    j["tolerances"] = {{"tol_shift", c.tol.tol_shift},     {"tol_theta", c.tol.tol_theta},
                       {"tol_deg_abs", c.tol.tol_deg_abs}, {"tol_deg_rel", c.tol.tol_deg_rel},
                       {"tol_case", c.tol.tol_case_rel}};
    j["verify"] = {{"suites", c.verify.suites},
                   {"L", c.verify.L},
                   {"samples", c.verify.samples},
                   {"seed", c.verify.seed ? json(*c.verify.seed) : json(nullptr)},
                   {"sampler", c.verify.sampler},
                   {"xi", c.verify.xi},
                   {"ks_grid", c.verify.ks_grid},
                   {"ks_factor", c.verify.ks_factor}};
    j["output"] = {{"format", c.format}, {"path", c.output_path}};
    return j;
}

/// Loads a preset or a model file and applies the support overrides.
inline Model resolve_model(const RunConfig& c) {
    Model m = [&] {
        Preset p;
        try {
            p = preset_from_string(c.model);
        } catch (const std::invalid_argument&) {
            return load_model(c.model);
        }
        PresetParams params;
        params.dimension = c.dimension;
        params.period = c.period;
        params.W = c.W;
        if (p == Preset::AlloyPeriodicW && !params.period) {
            params.period = 2;
            if (params.W.empty()) {
                params.W.assign(std::size_t{1} << c.dimension, 0.0);
                params.W.back() = 1.0;
            }
        }
        return preset_model(p, params);
    }();
    if (c.s_minus) m.support.s_minus = *c.s_minus;
    if (c.s_plus) m.support.s_plus = *c.s_plus;
    if (c.regime) m.support.regime = regime_from_string(*c.regime);
    return m;
}

struct InvariantResult {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct SuiteResult {
    std::string name;
    std::string csv;
    json summary;
    std::vector<InvariantResult> invariants;

    bool passed() const {
        return std::all_of(invariants.begin(), invariants.end(), [](const auto& i) { return i.passed; });
    }
};

inline json to_json(const std::vector<InvariantResult>& inv) {
    json a = json::array();
    for (const auto& i : inv) a.push_back({{"name", i.name}, {"passed", i.passed}, {"detail", i.detail}});
    return a;
}

/// Shortest round-trip representation for CSV cells.
inline std::string csv_num(double x) { return format_double(x); }

inline std::string theta_header(int d) {
    std::string s;
    for (int i = 0; i < d; ++i) s += "theta_" + std::to_string(i) + ",";
    return s;
}

inline std::string theta_cells(const Theta& t) {
    std::string s;
    for (double x : t) s += csv_num(x) + ",";
    return s;
}

inline json coefficients_json(const EdgeCoefficients& e, const std::vector<double>& eps) {
    auto opt = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
    json j;
    j["theta"] = theta_json(e.theta);
    j["p"] = e.p;
    j["P"] = std::vector<double>(e.P.data(), e.P.data() + e.P.size());
    j["A1"] = opt(e.A1);
    j["A2"] = opt(e.A2);
    j["A1_prime"] = opt(e.A1_prime);
    j["A2_prime"] = opt(e.A2_prime);
    j["V01_dim"] = e.V01_dim ? json(*e.V01_dim) : json(nullptr);
    j["regime"] = to_string(e.regime);
    j["case"] = to_string(e.edge_case);
    j["nondegenerate"] = e.nondegenerate;
    j["tol_case"] = e.tol_case;
    json bounds = json::array();
    for (double x : eps) {
        const auto b = edge_bound(e, x);
        bounds.push_back({{"epsilon", x}, {"value", b.value}, {"cubic_remainder", b.cubic_remainder},
                          {"large_epsilon", b.large_epsilon}});
    }
    j["bound"] = std::move(bounds);
    return j;
}

/// Ground space and coefficients at one minimizer.
struct MinimizerData {
    GroundSpaceData ground;
    EdgeCoefficients coeffs;
};

struct Analysis {
    Model model;
    ValidationReport validation;
    ThetaSet theta_set;
    std::vector<MinimizerData> minimizers;
};

/// validate -> shift -> scan -> ground_space and coefficients per theta.
/// Structural hypothesis failures (everything except the spectral bottom,
/// which the shift repairs) throw invalid_argument with the witness.
inline Analysis analyze(Model m, const ScanOptions& scan, const Tolerances& tol) {
    ScanOptions quick = scan;
    quick.grid_per_dim = 2;
    quick.refinements = 0;
    for (const auto& c : validate_hypotheses(m, tol, quick).checks)
        if (!c.passed && c.name != "hypa.bottom_at_zero")
            throw std::invalid_argument("model violates " + c.name + ": " + c.witness);
    m.h = shift_to_zero(m.h, scan.grid_per_dim, tol, scan.refinements);
    Analysis a{m, {}, {}, {}};
    a.validation = validate_hypotheses(m, tol, scan);
    a.theta_set = scan_theta_set(m.h, scan, tol);
    for (const auto& theta : a.theta_set.minimizers) {
        auto g = ground_space(m.h, theta, tol);
        auto e = edge_coefficients(g, m.v, m.support, tol);
        a.minimizers.push_back({std::move(g), std::move(e)});
    }
    return a;
}

/// Index of the minimizer giving the lowest bound at eps; ties keep the
/// lexicographically smallest theta.
inline std::size_t best_minimizer(const Analysis& a, double eps) {
    std::size_t best = 0;
    double value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.minimizers.size(); ++i) {
        const double v = edge_bound(a.minimizers[i].coeffs, eps).value;
        if (v < value) {
            value = v;
            best = i;
        }
    }
    return best;
}

// ---- verification suites ---------------------------------------------------

inline std::vector<double> default_sweep_epsilons() {
    std::vector<double> e;
    for (int k = 0; k <= 8; ++k) e.push_back(1e-3 * std::pow(10.0, k / 4.0));
    return e;
}

inline SuiteResult suite_fiber_sweep(const Analysis& a, std::vector<double> eps) {
    if (eps.empty()) eps = default_sweep_epsilons();
    const int d = a.model.h.geometry().dimension();
    SuiteResult r{"fiber-sweep", {}, json::object(), {}};
    std::ostringstream csv;
    csv << theta_header(d) << "epsilon,value,q_star,predicted,lower_C,upper_C,case\n";
    json per = json::array();
    bool upper = true, lower = true, stable = true, guard = true;
    std::string guard_msg;
    for (const auto& md : a.minimizers) {
        try {
            const auto rep = fiber_bound_sandwich(a.model.h, a.model.v, a.model.support, md.ground, md.coeffs, eps);
            for (const auto& row : rep.rows)
                csv << theta_cells(md.ground.theta) << csv_num(row.epsilon) << ',' << csv_num(row.value) << ','
                    << csv_num(row.q_star) << ',' << csv_num(row.predicted) << ',' << csv_num(row.lower_C) << ','
                    << csv_num(row.upper_C) << ',' << to_string(rep.edge_case) << '\n';
            upper = upper && rep.upper_ok;
            lower = lower && rep.lower_ok;
            stable = stable && rep.C_stable;
            json s{{"theta", theta_json(md.ground.theta)},
                   {"case", to_string(rep.edge_case)},
                   {"C_fit", rep.C_fit},
                   {"C_decade1", rep.C_decade1},
                   {"C_decade2", rep.C_decade2},
                   {"C_assessed", rep.C_assessed},
                   {"C_stable", rep.C_stable},
                   {"upper_ok", rep.upper_ok},
                   {"lower_ok", rep.lower_ok}};
            if (rep.residual_fit) {
                s["residual_slope"] = rep.residual_fit->slope;
                s["residual_r_squared"] = rep.residual_fit->r_squared;
            } else {
                s["residual_slope"] = nullptr;
                s["residual_r_squared"] = nullptr;
            }
            per.push_back(std::move(s));
        } catch (const Error& e) {
            guard = false;
            guard_msg = e.what();
        }
    }
    r.csv = csv.str();
    r.summary["minimizers"] = std::move(per);
    r.summary["epsilons"] = eps;
    r.invariants = {{"fiber_sweep.endpoint_guard", guard, guard_msg},
                    {"fiber_sweep.upper_bound", upper, "value <= predicted (+ rounding) for every epsilon"},
                    {"fiber_sweep.lower_bound", lower, "NoMotion: value >= -1e-12 for eps <= 1e-2"},
                    {"fiber_sweep.C_stable", stable, "remainder constant within 20% across the two smallest decades"}};
    return r;
}

inline SuiteResult suite_montecarlo(const Analysis& a, std::vector<double> eps, const VerifyConfig& vc) {
    if (eps.empty()) eps = {1e-3, 1e-2, 1e-1};
    const auto& m = a.model;
    const Sampler sampler{sampler_from_string(vc.sampler), 0.0};
    SuiteResult r{"montecarlo", {}, json::object(), {}};
    std::ostringstream csv;
    csv << "epsilon,seed,lambda_min\n";
    json per = json::array();
    std::vector<double> minima;
    bool trivial = true, exact = true;
    std::string exact_msg = "constant configurations match the dual-grid fiber minimum to 1e-10";
    const double vnorm = m.v.norm();
    for (double e : eps) {
        const auto res = monte_carlo_min(m.h, m.v, m.support, e, vc.L, vc.samples, sampler, *vc.seed);
        for (std::size_t i = 0; i < res.seeds.size(); ++i)
            csv << csv_num(e) << ',' << res.seeds[i] << ',' << csv_num(res.lambda_mins[i]) << '\n';
        const double floor = -e * m.support.max_abs() * vnorm - 1e-10 * std::max(1.0, m.h.max_abs());
        for (double x : res.lambda_mins) trivial = trivial && x >= floor;
        for (double q : {m.support.s_minus, m.support.s_plus}) {
            const double box = box_min_eig(m.h, m.v, m.support, e, vc.L, Sampler::constant(q), 0).lambda_min;
            const double fib = torus_fiber_min(m.h, m.v, q, e, vc.L);
            if (std::abs(box - fib) > 1e-10) {
                exact = false;
                exact_msg = "eps=" + format_double(e) + " q=" + format_double(q) + ": box " + format_double(box) +
                            " vs fibers " + format_double(fib);
            }
        }
        minima.push_back(res.minimum);
        per.push_back({{"epsilon", e},
                       {"minimum", res.minimum},
                       {"mean", res.mean},
                       {"periodic_bound", res.periodic_bound},
                       {"minimum_minus_periodic_bound", res.minimum - res.periodic_bound}});
    }
    r.csv = csv.str();
    r.summary["per_epsilon"] = std::move(per);
    try {
        const auto fit = fit_exponent(eps, minima);
        r.summary["eta"] = fit.eta;
        r.summary["prefactor"] = fit.prefactor;
        r.summary["r_squared"] = fit.r_squared;
        r.summary["excluded"] = fit.excluded;
    } catch (const std::invalid_argument& e) {
        r.summary["eta"] = nullptr;
        r.summary["fit_error"] = e.what();
    }
    r.invariants = {{"montecarlo.trivial_lower_bound", trivial, "lambda_min >= -eps max|s| |V|"},
                    {"montecarlo.torus_exactness", exact, exact_msg}};
    return r;
}

inline SuiteResult suite_quartic(std::vector<double> eps, double xi) {
    if (eps.empty()) eps = {1e-3, 3e-3, 1e-2};
    SuiteResult r{"quartic", {}, json::object(), {}};
    std::ostringstream csv;
    csv << "epsilon,xi,n,value,target,meets_target\n";
    std::vector<double> values;
    bool all = true;
    std::string worst;
    for (double e : eps) {
        const auto t = quartic_trial_energy(e, xi);
        csv << csv_num(e) << ',' << csv_num(xi) << ',' << t.n << ',' << csv_num(t.value) << ',' << csv_num(t.target)
            << ',' << (t.meets_target ? "true" : "false") << '\n';
        values.push_back(t.value);
        if (!t.meets_target) {
            all = false;
            worst = "eps=" + format_double(e) + ": value " + format_double(t.value) + " > target " + format_double(t.target);
        }
    }
    r.csv = csv.str();
    r.summary["xi"] = xi;
    r.summary["values"] = values;
    InvariantResult eta{"quartic.eta", false, ""};
    try {
        const auto fit = fit_exponent(eps, values);
        r.summary["eta"] = fit.eta;
        r.summary["r_squared"] = fit.r_squared;
        eta.passed = std::abs(fit.eta - (1.0 + 2.0 * xi)) <= 0.1;
        eta.detail = "eta = " + format_double(fit.eta) + ", expected " + format_double(1.0 + 2.0 * xi) + " +- 0.1";
    } catch (const std::invalid_argument& e) {
        r.summary["eta"] = nullptr;
        eta.detail = e.what();
    }
    r.invariants = {{"quartic.trial_bound", all, all ? "value <= -(1/6) eps^(1+2 xi) for every epsilon" : worst},
                    std::move(eta)};
    return r;
}

inline SuiteResult suite_kirsch_simon(const Analysis& a, const VerifyConfig& vc) {
    const auto& g = a.model.h.geometry();
    const int per_dim = vc.ks_grid > 0 ? vc.ks_grid : (g.dimension() == 1 ? 256 : 32);
    const auto factor = dispersion_from_string(vc.ks_factor);
    const auto rep = kirsch_simon_sandwich(a.model.h, centered_zone_grid(g.dimension(), g.period(), per_dim), factor);
    SuiteResult r{"kirsch-simon", {}, json::object(), {}};
    std::ostringstream csv;
    csv << theta_header(g.dimension()) << "dE,lower,upper,ok\n";
    for (const auto& p : rep.points)
        csv << theta_cells(p.theta) << csv_num(p.dE) << ',' << csv_num(p.lower) << ',' << csv_num(p.upper) << ','
            << (p.ok ? "true" : "false") << '\n';
    r.csv = csv.str();
    r.summary = {{"a_minus", rep.a_minus}, {"a_plus", rep.a_plus}, {"factor", to_string(rep.factor)},
                 {"grid_points", rep.points.size()}, {"violations", rep.violations}};
    r.invariants = {{"kirsch_simon.sandwich", rep.passed(), std::to_string(rep.violations) + " grid points violate"}};
    return r;
}

struct PipelineResult {
    json report;
    /// Bounds table (CSV) for the csv output format.
    std::string csv;
    bool passed = true;
    int exit_status() const { return passed ? 0 : 1; }
};

inline PipelineResult run_pipeline(RunConfig config) {
    config.validate();
    PipelineResult out;
    json& rep = out.report;
    rep["config"] = to_json(config);

    const Model model = resolve_model(config);
    const auto a = analyze(model, config.scan, config.tol);
    const auto& g = a.model.h.geometry();
    rep["model"] = {{"name", a.model.name},
                    {"dimension", g.dimension()},
                    {"period", g.period()},
                    {"cell_size", g.cell_size()},
                    {"energy_shift", a.model.h.energy_shift()},
                    {"disorder",
                     {{"s_minus", a.model.support.s_minus},
                      {"s_plus", a.model.support.s_plus},
                      {"regime", to_string(a.model.support.regime)}}}};
    json val = json::array();
    for (const auto& c : a.validation.checks) val.push_back({{"name", c.name}, {"passed", c.passed}, {"witness", c.witness}});
    rep["validation"] = std::move(val);
    json mins = json::array();
    for (const auto& t : a.theta_set.minimizers) mins.push_back(theta_json(t));
    rep["theta_set"] = {{"E0", a.theta_set.E0}, {"resolution", a.theta_set.resolution}, {"minimizers", std::move(mins)}};
    json coeffs = json::array();
    for (const auto& md : a.minimizers) coeffs.push_back(coefficients_json(md.coeffs, config.epsilons));
    rep["coefficients"] = std::move(coeffs);

    std::ostringstream csv;
    csv << "epsilon," << theta_header(g.dimension()) << "case,bound,cubic_remainder,large_epsilon\n";
    json bounds = json::array();
    for (double e : config.epsilons) {
        const auto& md = a.minimizers[best_minimizer(a, e)];
        const auto b = edge_bound(md.coeffs, e);
        bounds.push_back({{"epsilon", e},
                          {"theta", theta_json(md.coeffs.theta)},
                          {"case", to_string(b.edge_case)},
                          {"value", b.value},
                          {"cubic_remainder", b.cubic_remainder},
                          {"large_epsilon", b.large_epsilon}});
        csv << csv_num(e) << ',' << theta_cells(md.coeffs.theta) << to_string(b.edge_case) << ',' << csv_num(b.value)
            << ',' << (b.cubic_remainder ? "true" : "false") << ',' << (b.large_epsilon ? "true" : "false") << '\n';
    }
    rep["bounds"] = std::move(bounds);
    out.csv = csv.str();

    std::vector<InvariantResult> inv;
    inv.push_back({"validation.hypotheses", a.validation.all_passed(), "all standing hypotheses hold"});
    json ver = json::object();
    {
        for (const auto& name : config.verify.suites) {
            SuiteResult s;
            if (name == "fiber-sweep")
                s = suite_fiber_sweep(a, config.epsilons);
            else if (name == "montecarlo")
                s = suite_montecarlo(a, config.epsilons, config.verify);
            else if (name == "quartic")
                s = suite_quartic(config.epsilons, config.verify.xi);
            else
                s = suite_kirsch_simon(a, config.verify);
            ver[name] = {{"summary", s.summary}, {"invariants", to_json(s.invariants)}, {"passed", s.passed()}};
            inv.insert(inv.end(), s.invariants.begin(), s.invariants.end());
        }
    }
    rep["verification"] = std::move(ver);
    rep["invariants"] = to_json(inv);
    out.passed = std::all_of(inv.begin(), inv.end(), [](const auto& i) { return i.passed; });
    rep["passed"] = out.passed;
    return out;
}

}  // namespace edgeshift
