#include "qbsde/runs.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qbsde/norms.hpp"
#include "qbsde/oracle.hpp"

namespace qbsde {

using nlohmann::json;

namespace {

std::vector<double> terminal_field(const PathEnsemble& e, const TerminalCondition& tc) {
    const std::size_t n = tc.h.size();
    std::vector<double> out(e.paths() * n);
    std::vector<double> xi(n);
    for (std::size_t m = 0; m < e.paths(); ++m) {
        tc.evaluate(e.state(m, e.grid().N), xi);
        for (std::size_t i = 0; i < n; ++i) out[m * n + i] = xi[i];
    }
    return out;
}

PathEnsemble build_ensemble(const ExperimentConfig& cfg) {
    const auto d = static_cast<std::size_t>(cfg.model.constants.d);
    if (cfg.sim.antithetic)
        return simulate_antithetic(cfg.sim.seed, cfg.sim.M, cfg.sim.N,
                                   cfg.model.constants.T, d);
    return simulate(cfg.sim.seed, cfg.sim.M, cfg.sim.N, cfg.model.constants.T, d);
}

PicardOptions picard_options(const ExperimentConfig& cfg) {
    PicardOptions opts;
    opts.solver.basis_degree = cfg.sim.basis_degree;
    opts.solver.inner_iters = cfg.sim.inner_iters;
    opts.solver.z_clip = cfg.sim.z_clip;
    opts.mode = cfg.run.picard_mode;
    if (cfg.run.picard_mode == PicardMode::FrozenY && !cfg.model.all_diagonal())
        opts.mode = PicardMode::FrozenYV;
    opts.max_iters = cfg.run.max_iters;
    opts.tol = cfg.run.tol;
    opts.window = cfg.run.window;
    return opts;
}

json report_to_json(const ValidationReport& rep) {
    json j;
    j["assumption"] = assumption_name(rep.which);
    j["samples"] = rep.samples;
    j["violations"] = rep.violations;
    j["worst_margin"] = rep.worst_margin;
    j["seed"] = rep.seed;
    j["box"] = {{"r_y", rep.box_ry}, {"r_z", rep.box_rz}};
    if (rep.which == Assumption::H2) j["h2_multiplier"] = rep.h2_multiplier;
    json pcs = json::array();
    for (const auto& pc : rep.per_component) {
        json p;
        p["violations"] = pc.violations;
        if (rep.which == Assumption::H5)
            p["variant"] = pc.h5_variant > 0   ? "lower"
                           : pc.h5_variant < 0 ? "upper"
                                               : "neither";
        if (rep.which == Assumption::B3)
            p["tag"] = pc.midpoint_tag == ConvexityTag::Convex    ? "convex"
                       : pc.midpoint_tag == ConvexityTag::Concave ? "concave"
                                                                  : "none";
        pcs.push_back(p);
    }
    if (!pcs.empty()) j["per_component"] = pcs;
    return j;
}

json norm_to_json(const norms::NormEstimate& e) {
    json j;
    j["value"] = e.value;
    j["log_value"] = e.log_value;
    j["overflow"] = e.overflow;
    j["note"] = e.note;
    return j;
}

} // namespace

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

ValidateOutcome run_validate(const ExperimentConfig& cfg) {
    ValidateOutcome out;
    const GeneratorModel& model = cfg.model;
    const std::size_t S = cfg.run.samples;
    const std::uint64_t seed = cfg.sim.seed;
    const ValidatorOptions& boxes = cfg.run.boxes;

    for (Assumption a : {Assumption::H1, Assumption::H2, Assumption::H4, Assumption::H5})
        out.reports.push_back(validate_H(model, a, S, seed, boxes));
    for (Assumption a : {Assumption::B1, Assumption::B2, Assumption::B3})
        out.reports.push_back(validate_B(model, a, S, seed, boxes));

    out.terminal_sup = terminal_sup_probe(cfg.terminal, model.constants);
    if (cfg.terminal.bounded)
        out.terminal_bound_ok = out.terminal_sup <= model.constants.C1 + 1e-9;

    // Exponential-moment diagnostic for the data (the B-set's integrability
    // class): |xi| + int_0^T alpha dt sampled on a small ensemble, checked
    // for finite moments at a few orders.
    {
        const auto n = static_cast<std::size_t>(model.constants.n);
        const auto d = static_cast<std::size_t>(model.constants.d);
        const std::size_t probes = 4096;
        const PathEnsemble e =
            simulate(seed ^ 0xB4ULL, probes, std::min<std::size_t>(cfg.sim.N, 32),
                     model.constants.T, d);
        const double dt = e.grid().dt();
        std::vector<double> data(probes, 0.0), xi(n);
        for (std::size_t m = 0; m < probes; ++m) {
            cfg.terminal.evaluate(e.state(m, e.grid().N), xi);
            double nrm = 0.0;
            for (double v : xi) nrm += v * v;
            double aint = 0.0;
            for (std::size_t k = 0; k < e.grid().N; ++k)
                aint += model.alpha_value(e.grid().node(k), e.state(m, k)) * dt;
            data[m] = std::sqrt(nrm) + aint;
        }
        out.b4_ok = true;
        for (double p : {1.0, 2.0, 4.0}) {
            const auto est = norms::exp_moment_samples(data, p);
            out.b4_log_moments.push_back(est.log_value);
            if (est.overflow) out.b4_ok = false;
        }
    }

    auto passed = [&](Assumption a) {
        for (const auto& r : out.reports)
            if (r.which == a) return r.violations == 0;
        return false;
    };
    const bool h12 = passed(Assumption::H1) && passed(Assumption::H2);
    const bool bounded = cfg.terminal.bounded && out.terminal_bound_ok;
    if (h12 && bounded) out.theorem_tags.push_back("2.1 (local)");
    if (h12 && bounded && passed(Assumption::H4) && model.constants.lambda == 0.0)
        out.theorem_tags.push_back("2.4 (global, one-sided, lambda = 0)");
    if (h12 && bounded && passed(Assumption::H4) && passed(Assumption::H5))
        out.theorem_tags.push_back("2.5 (global, strictly quadratic)");
    if (passed(Assumption::B1) && passed(Assumption::B2) && passed(Assumption::B3) &&
        out.b4_ok)
        out.theorem_tags.push_back("2.8 (global, unbounded terminal)");
    return out;
}

json ValidateOutcome::to_json() const {
    json j;
    json reps = json::array();
    for (const auto& r : reports) reps.push_back(report_to_json(r));
    j["assumptions"] = reps;
    j["terminal"] = {{"sup", terminal_sup}, {"bound_ok", terminal_bound_ok}};
    j["b4"] = {{"finite", b4_ok}, {"log_moments", b4_log_moments}};
    j["theorem_tags"] = theorem_tags;
    return j;
}

std::string ValidateOutcome::table() const {
    std::ostringstream os;
    os << "assumption  samples  violations  worst_margin  notes\n";
    for (const auto& r : reports) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-10s  %7zu  %10zu  %12.4g  ",
                      assumption_name(r.which).c_str(), r.samples, r.violations,
                      r.worst_margin);
        os << line;
        if (r.which == Assumption::H2) os << "multiplier=" << r.h2_multiplier << " ";
        if (r.which == Assumption::H5) {
            os << "variants=";
            for (const auto& pc : r.per_component)
                os << (pc.h5_variant > 0 ? "+" : pc.h5_variant < 0 ? "-" : "?");
        }
        if (r.which == Assumption::B3) {
            os << "tags=";
            for (const auto& pc : r.per_component)
                os << (pc.midpoint_tag == ConvexityTag::Convex    ? "v"
                       : pc.midpoint_tag == ConvexityTag::Concave ? "^"
                                                                  : "?");
        }
        os << "\n";
    }
    os << "terminal sup " << terminal_sup << (terminal_bound_ok ? " (within C1)" : " (exceeds C1)")
       << "\n";
    os << "data exponential moments " << (b4_ok ? "finite" : "OVERFLOW") << " (log:";
    for (double v : b4_log_moments) os << " " << v;
    os << ")\n";
    os << "hypothesis sets held:";
    if (theorem_tags.empty()) os << " none";
    for (const auto& t : theorem_tags) os << " [" << t << "]";
    os << "\n";
    return os.str();
}

int ValidateOutcome::exit_code() const {
    // Success means the model lands in at least one of the hypothesis
    // classes; per-assumption violations are data in the table.
    return theorem_tags.empty() ? kExitValidation : kExitOk;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

BoundsOutcome run_bounds(const ExperimentConfig& cfg, double q) {
    BoundsOutcome out;
    out.report = bounds::bound_report(cfg.model.constants, q);
    return out;
}

json BoundsOutcome::to_json() const {
    json j;
    for (const auto& [key, entry] : report.entries)
        j[key] = {{"value", entry.value}, {"status", entry.status}};
    return j;
}

std::string BoundsOutcome::table() const {
    std::ostringstream os;
    for (const auto& [key, entry] : report.entries) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-18s %24.12g  %s\n", key.c_str(), entry.value,
                      entry.status.c_str());
        os << line;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

SolveOutcome run_solve(const ExperimentConfig& cfg, bool deterministic) {
    const auto t_start = std::chrono::steady_clock::now();
    SolveOutcome out;
    out.seed = cfg.sim.seed;
    const StructuralConstants& c = cfg.model.constants;
    const auto n = static_cast<std::size_t>(c.n);

    json summary;
    summary["config"] = cfg.resolved;
    summary["seed"] = cfg.sim.seed;

    if (cfg.run.validate) {
        const ValidateOutcome val = run_validate(cfg);
        summary["validation"] = val.to_json();
        if (val.exit_code() != kExitOk && !cfg.run.override_validation) {
            out.exit_code = kExitValidation;
            summary["status"] = "validation violations (set run.override_validation to solve anyway)";
            out.summary = std::move(summary);
            return out;
        }
    }

    const PathEnsemble ensemble = build_ensemble(cfg);
    const std::vector<double> terminal = terminal_field(ensemble, cfg.terminal);
    const PicardOptions opts = picard_options(cfg);

    std::size_t k_lo = 0;
    const std::size_t k_hi = ensemble.grid().N;
    IterationTrace trace;
    std::vector<IntervalAudit> interval_audits;
    double seam_max_diff = 0.0;
    bool converged = false;
    std::string mode_name;

    BsdeSolution solution;
    if (cfg.run.mode == RunMode::Global) {
        mode_name = "global";
        StitchPlan plan;
        if (cfg.run.plan == PlanChoice::Single) {
            plan.eps = c.T;
            plan.boundaries = {k_hi, 0};
        } else if (cfg.run.plan == PlanChoice::Explicit) {
            plan.eps = 0.0;
            const double dt = ensemble.grid().dt();
            for (double t : cfg.run.plan_boundaries)
                plan.boundaries.push_back(
                    static_cast<std::size_t>(std::llround(t / dt)));
            if (plan.boundaries.empty() || plan.boundaries.front() != k_hi ||
                plan.boundaries.back() != 0)
                throw ConfigError("run.plan boundaries must descend from T to 0");
        } else {
            const auto st = bounds::stitch_step(c);
            plan = st.single_interval ? StitchPlan{{k_hi, 0}, c.T}
                                      : make_plan(ensemble.grid(), st.eps);
        }
        json jplan = json::array();
        for (std::size_t b : plan.boundaries)
            jplan.push_back(ensemble.grid().node(b));
        summary["plan"] = jplan;

        const GlobalSolveResult g = solve_global(cfg.model, terminal, ensemble, plan, opts);
        converged = g.converged;
        seam_max_diff = g.seam_max_diff;
        interval_audits = g.intervals;
        solution = std::move(const_cast<GlobalSolveResult&>(g).solution);
        for (const auto& audit : interval_audits)
            for (const auto& rec : audit.trace.records) trace.records.push_back(rec);
        trace.converged = converged;
    } else {
        const bounds::LocalRadii lr = bounds::local_radii(c);
        if (cfg.run.mode == RunMode::Local) {
            mode_name = "local";
            double eps = std::min(lr.eps0, c.T);
            if (!(eps > 0.0) || lr.overflow) eps = c.T;
            const double dt = ensemble.grid().dt();
            if (eps < dt) {
                summary["warnings"] = json::array(
                    {"eps0 is below the grid step; solving the last step only"});
                eps = dt;
            }
            k_lo = k_hi - std::max<std::size_t>(
                              1, static_cast<std::size_t>(std::floor(eps / dt + 1e-9)));
            summary["local_window"] = {{"t_lo", ensemble.grid().node(k_lo)},
                                       {"eps0", lr.eps0_unbounded ? -1.0 : lr.eps0}};
        } else {
            mode_name = "picard";
        }
        const PicardResult r =
            picard_iterate(cfg.model, terminal, ensemble, k_lo, k_hi, opts);
        converged = r.trace.converged;
        trace = r.trace;
        solution = std::move(const_cast<PicardResult&>(r).solution);

        if (!cfg.run.thetas.empty() && r.window.size() >= 2) {
            json jt = json::array();
            for (double theta : cfg.run.thetas)
                for (double q : cfg.run.qs) {
                    const ThetaReport rep =
                        theta_monitor(r.window, r.window_indices, theta, q, c.gamma);
                    for (const auto& row : rep.rows) {
                        json jr;
                        jr["theta"] = theta;
                        jr["q"] = q;
                        jr["m"] = row.m;
                        jr["p"] = row.p;
                        jr["q_used"] = row.q_used;
                        jr["log_exp_moment"] = row.log_exp_moment;
                        jr["overflow"] = row.overflow;
                        jt.push_back(jr);
                    }
                }
            summary["theta_monitor"] = jt;
        }
    }

    summary["mode"] = mode_name;
    summary["status"] = converged ? "converged" : "not converged";
    out.converged = converged;
    if (!converged) out.exit_code = kExitNotConverged;

    // Y0 statistics: cross-path mean and spread per component at the first
    // solved node.
    {
        json y0;
        std::vector<double> mean(n, 0.0), var(n, 0.0);
        const std::size_t M = solution.Y.M;
        for (std::size_t m = 0; m < M; ++m) {
            const auto y = solution.Y.at(m, k_lo);
            for (std::size_t i = 0; i < n; ++i) mean[i] += y[i];
        }
        for (auto& v : mean) v /= static_cast<double>(M);
        for (std::size_t m = 0; m < M; ++m) {
            const auto y = solution.Y.at(m, k_lo);
            for (std::size_t i = 0; i < n; ++i)
                var[i] += (y[i] - mean[i]) * (y[i] - mean[i]);
        }
        for (auto& v : var) v = std::sqrt(v / static_cast<double>(M));
        y0["mean"] = mean;
        y0["std"] = var;
        summary["y0"] = y0;
    }

    // Norm table.
    {
        json jn;
        jn["s_inf"] = norms::s_inf(solution.Y);
        jn["s_2"] = norms::s_p(solution.Y, 2.0);
        jn["h_2"] = norms::h_p(solution.Z, ensemble.grid().dt(), 2.0);
        jn["bmo"] = norm_to_json(
            norms::bmo(solution.Z, ensemble, k_lo, k_hi, cfg.sim.basis_degree));
        for (double q : cfg.run.qs)
            jn["exp_moment_q" + std::to_string(q)] =
                norm_to_json(norms::exp_moment(solution.Y, q, c.gamma));
        summary["norms"] = jn;
    }

    // Bound audit.
    {
        json jb;
        for (auto variant : {bounds::Variant::I, bounds::Variant::II}) {
            const BoundAudit audit = bound_audit(solution, c, variant);
            json ja;
            ja["measured_sup"] = audit.measured_sup;
            ja["per_component_sup"] = audit.per_component_sup;
            ja["lemma41"] = audit.interval_bound;
            ja["lemma41_overflow"] = audit.interval_bound_overflow;
            ja["gronwall"] = audit.gronwall;
            ja["margin_lemma41"] = audit.margin_interval;
            ja["margin_gronwall"] = audit.margin_gronwall;
            jb[variant == bounds::Variant::I ? "variant_i" : "variant_ii"] = ja;
        }
        summary["bound_audit"] = jb;
    }

    // Iteration trace (also emitted as CSV).
    {
        json jt = json::array();
        std::ostringstream csv;
        csv << "m,dY,dZ,ratio,seconds\n";
        for (const auto& rec : trace.records) {
            json jr;
            jr["m"] = rec.m;
            jr["dY"] = rec.dY;
            jr["dZ"] = rec.dZ;
            jr["ratio"] = rec.ratio;
            if (!deterministic) jr["seconds"] = rec.seconds;
            jt.push_back(jr);
            char line[160];
            std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.6f\n", rec.m, rec.dY,
                          rec.dZ, rec.ratio, rec.seconds);
            csv << line;
        }
        summary["iterations"] = {{"count", trace.records.size()},
                                 {"converged", trace.converged},
                                 {"diverged", trace.diverged},
                                 {"final_dY",
                                  trace.records.empty() ? 0.0 : trace.records.back().dY},
                                 {"trace", jt}};
        out.trace_csv = csv.str();
    }

    if (cfg.run.mode == RunMode::Global) {
        json ji = json::array();
        for (const auto& audit : interval_audits) {
            json ja;
            ja["index"] = audit.index;
            ja["t_lo"] = ensemble.grid().node(audit.k_lo);
            ja["t_hi"] = ensemble.grid().node(audit.k_hi);
            ja["measured_sup"] = audit.measured_sup;
            ja["boundary_sup"] = audit.boundary_sup;
            ja["recursion_rhs"] = audit.recursion_rhs;
            ja["converged"] = audit.trace.converged;
            ji.push_back(ja);
        }
        summary["intervals"] = ji;
        summary["seam_max_diff"] = seam_max_diff;
    }

    summary["z_clip_used"] = solution.z_clip_used;
    if (!deterministic) {
        summary["runtime_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                .count();
    }

    out.summary = std::move(summary);
    out.solution = std::move(solution);
    return out;
}

void dump_fields(const SolveOutcome& outcome, const ExperimentConfig& cfg,
                 const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ResourceError("cannot open " + path + " for writing");
    const char magic[8] = {'Q', 'B', 'S', 'D', 'E', 'F', 'L', 'D'};
    const std::uint64_t header[6] = {1,
                                     outcome.seed,
                                     outcome.solution.Y.M,
                                     cfg.sim.N,
                                     outcome.solution.Y.n,
                                     outcome.solution.Z.d};
    const double T = cfg.model.constants.T;
    os.write(magic, sizeof(magic));
    os.write(reinterpret_cast<const char*>(header), sizeof(header));
    os.write(reinterpret_cast<const char*>(&T), sizeof(T));
    os.write(reinterpret_cast<const char*>(outcome.solution.Y.v.data()),
             static_cast<std::streamsize>(outcome.solution.Y.v.size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(outcome.solution.Z.v.data()),
             static_cast<std::streamsize>(outcome.solution.Z.v.size() * sizeof(double)));
    if (!os) throw ResourceError("short write to " + path);
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

namespace {

json make_scalar_config(const std::string& driver_expr, const std::string& terminal_expr,
                        double gamma, double T, std::size_t M, std::size_t N,
                        double C1 = 0.0, bool bounded = false) {
    json cfg;
    cfg["constants"] = {{"n", 1},     {"d", 1},     {"T", T},  {"gamma", gamma},
                        {"gamma_bar", gamma},       {"C1", C1}};
    cfg["generator"] = {{"components", json::array({driver_expr})},
                        {"diagonal", json::array({true})}};
    cfg["terminal"] = {{"components", json::array({terminal_expr})}, {"bounded", bounded}};
    cfg["simulation"] = {{"M", M}, {"N", N}, {"seed", 20260811}, {"antithetic", true}};
    cfg["run"] = {{"mode", "picard"}, {"validate", false}, {"tol", 1e-5}};
    return cfg;
}

VerifyCase run_case(const std::string& name, const json& cfg_json,
                    const std::vector<double>& expected, double tol,
                    const std::string& note) {
    VerifyCase vc;
    vc.name = name;
    vc.expected = expected;
    vc.tolerance = tol;
    vc.note = note;
    const ExperimentConfig cfg = parse_config(cfg_json);
    const SolveOutcome out = run_solve(cfg, true);
    vc.measured = out.summary["y0"]["mean"].get<std::vector<double>>();
    vc.passed = out.converged && vc.measured.size() == expected.size();
    if (vc.passed)
        for (std::size_t i = 0; i < expected.size(); ++i)
            if (std::fabs(vc.measured[i] - expected[i]) > tol) vc.passed = false;
    return vc;
}

} // namespace

VerifyOutcome run_verify(bool quick, const std::string& filter) {
    VerifyOutcome out;
    const std::size_t M = quick ? 5000 : 20000;
    const std::size_t N = quick ? 25 : 50;
    const double f = quick ? 2.0 : 1.0; // quick mode runs looser

    std::vector<VerifyCase> cases;

    cases.push_back(run_case(
        "zero_driver_constant",
        make_scalar_config("0", "1 + 0*b1", 1.0, 1.0, M, N, 1.0, true), {1.0}, 1e-9,
        "g = 0 with constant terminal reproduces the constant"));

    cases.push_back(run_case(
        "exp_transform_linear",
        make_scalar_config("0.5*norm(zrow(1))^2", "b1", 1.0, 1.0, M, N), {0.5}, f * 1e-2,
        "Gaussian moment generating function"));

    {
        auto clamp3 = [](double b) { return std::min(std::max(b, -3.0), 3.0); };
        const double oracle = cole_hopf_value(1.0, clamp3, 1.0);
        cases.push_back(run_case(
            "exp_transform_clamped",
            make_scalar_config("0.5*norm(zrow(1))^2", "min(max(b1, -3), 3)", 1.0, 1.0, M, N,
                               3.0, true),
            {oracle}, f * 1e-2, "exponential transform with quadrature reference"));
    }

    cases.push_back(run_case(
        "exp_transform_concave",
        make_scalar_config("-0.5*norm(zrow(1))^2", "b1", 1.0, 1.0, M, N), {-0.5},
        f * 1e-2, "concave mirror of the Gaussian mgf"));

    {
        auto hsin = [](double b) { return std::sin(b); };
        const OracleCase oc = pure_quadratic_case({1.0, 1.0}, {+1, -1}, {hsin, hsin}, 1.0);
        json cfg;
        cfg["constants"] = {{"n", 2}, {"d", 1}, {"T", 1.0}, {"gamma", 1.0},
                            {"gamma_bar", 1.0}, {"C1", 1.5}};
        cfg["generator"] = {
            {"components",
             json::array({json{{"builtin", "diag_quad"}, {"gamma", 1.0}, {"sign", 1}},
                          json{{"builtin", "diag_quad"}, {"gamma", 1.0}, {"sign", -1}}})},
            {"diagonal", json::array({true, true})},
            {"convexity", json::array({"convex", "concave"})}};
        cfg["terminal"] = {{"components", json::array({"sin(b1)", "sin(b1)"})},
                           {"bounded", true}};
        cfg["simulation"] = {{"M", M}, {"N", N}, {"seed", 20260811}, {"antithetic", true}};
        cfg["run"] = {{"mode", "picard"}, {"validate", false}, {"tol", 1e-5}};
        VerifyCase vc = run_case("convex_concave_pair", cfg, oc.y0, f * 1e-2,
                                 "signed exponential transforms; antithetic symmetry");
        if (vc.passed && std::fabs(vc.measured[0] + vc.measured[1]) > 1e-3)
            vc.passed = false;
        cases.push_back(std::move(vc));
    }

    cases.push_back(run_case(
        "drift_linear",
        make_scalar_config("z[1][1]", "b1", 1.0, 1.0, M, N), {1.0}, f * 2e-2,
        "Girsanov shift of the terminal mean"));

    // The even payoff gets no antithetic cancellation; its estimator noise
    // needs the wider band.
    cases.push_back(run_case(
        "drift_quadratic_terminal",
        make_scalar_config("z[1][1]", "b1^2", 1.0, 1.0, M, N), {2.0}, f * 4e-2,
        "shifted Gaussian second moment"));

    cases.push_back(run_case(
        "ode_growth",
        make_scalar_config("y1", "1 + 0*b1", 1.0, 1.0, M, N, 1.0, true),
        {std::exp(1.0)}, 6e-2, "linear ODE; implicit-Euler bias shrinks with N"));

    cases.push_back(run_case(
        "ode_decay",
        make_scalar_config("-y1", "2 + 0*b1", 1.0, std::log(2.0), M, N, 2.0, true), {1.0},
        f * 2e-2, "linear decay over T = ln 2"));

    for (auto& vc : cases) {
        if (!filter.empty() && vc.name.find(filter) == std::string::npos) continue;
        out.all_passed = out.all_passed && vc.passed;
        out.cases.push_back(std::move(vc));
    }
    if (out.cases.empty())
        throw ConfigError("no verify case matches filter `" + filter + "`");
    return out;
}

std::string VerifyOutcome::table() const {
    std::ostringstream os;
    os << "case                        expected      measured      tol      result\n";
    for (const auto& vc : cases) {
        for (std::size_t i = 0; i < vc.expected.size(); ++i) {
            char line[160];
            std::snprintf(line, sizeof(line), "%-26s  %11.6f  %11.6f  %7.0e  %s\n",
                          i == 0 ? vc.name.c_str() : "", vc.expected[i],
                          i < vc.measured.size() ? vc.measured[i] : 0.0, vc.tolerance,
                          i == 0 ? (vc.passed ? "pass" : "FAIL") : "");
            os << line;
        }
    }
    os << (all_passed ? "all cases passed\n" : "FAILURES present\n");
    return os.str();
}

json VerifyOutcome::to_json() const {
    json j = json::array();
    for (const auto& vc : cases) {
        json c;
        c["name"] = vc.name;
        c["expected"] = vc.expected;
        c["measured"] = vc.measured;
        c["tolerance"] = vc.tolerance;
        c["passed"] = vc.passed;
        c["note"] = vc.note;
        j.push_back(c);
    }
    return json{{"cases", j}, {"all_passed", all_passed}};
}

} // namespace qbsde
