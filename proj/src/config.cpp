#include "qbsde/config.hpp"

#include <fstream>

namespace qbsde {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

double get_number(const json& j, const std::string& path, const char* key, double fallback,
                  bool required = false) {
    if (!j.contains(key)) {
        if (required) fail(path + "." + key, "missing required field");
        return fallback;
    }
    if (!j[key].is_number()) fail(path + "." + key, "expected a number");
    return j[key].get<double>();
}

std::map<std::string, double> parse_params(const json& doc) {
    std::map<std::string, double> params;
    if (!doc.contains("params")) return params;
    if (!doc["params"].is_object()) fail("params", "expected an object of named numbers");
    for (const auto& [name, value] : doc["params"].items()) {
        if (!value.is_number()) fail("params." + name, "expected a number");
        params[name] = value.get<double>();
    }
    return params;
}

PhiFunction parse_phi(const json& j, const std::string& path,
                      const std::map<std::string, double>& params) {
    if (j.is_string()) {
        ExprContext ctx = ExprContext::scalar(params);
        return PhiFunction::custom(parse_expr(j.get<std::string>(), ctx));
    }
    if (j.is_object()) {
        if (j.contains("expr")) {
            ExprContext ctx = ExprContext::scalar(params);
            return PhiFunction::custom(parse_expr(j["expr"].get<std::string>(), ctx));
        }
        if (j.contains("builtin")) {
            const std::string kind = j["builtin"].get<std::string>();
            if (kind == "zero") return PhiFunction::zero();
            if (kind == "power" || kind == "affine")
                return PhiFunction::power(get_number(j, path, "coef", 1.0),
                                          kind == "affine"
                                              ? 1.0
                                              : get_number(j, path, "exponent", 1.0));
            fail(path + ".builtin", "unknown phi builtin `" + kind + "`");
        }
    }
    fail(path, "expected a phi expression string or {builtin:...}");
}

StructuralConstants parse_constants(const json& doc,
                                    const std::map<std::string, double>& params) {
    if (!doc.contains("constants")) fail("constants", "missing block");
    const json& j = doc["constants"];
    StructuralConstants c;
    c.n = static_cast<int>(get_number(j, "constants", "n", 1, true));
    c.d = static_cast<int>(get_number(j, "constants", "d", 1, true));
    c.T = get_number(j, "constants", "T", 1.0, true);
    c.beta = get_number(j, "constants", "beta", 0.0);
    c.gamma = get_number(j, "constants", "gamma", 1.0);
    c.gamma_bar = get_number(j, "constants", "gamma_bar", c.gamma);
    c.lambda = get_number(j, "constants", "lambda", 0.0);
    c.delta = get_number(j, "constants", "delta", 0.0);
    c.C1 = get_number(j, "constants", "C1", 0.0);
    c.C2 = get_number(j, "constants", "C2", 0.0);
    if (j.contains("phi")) c.phi = parse_phi(j["phi"], "constants.phi", params);
    try {
        c.validate();
    } catch (const ConfigError& e) {
        fail("constants", e.what());
    }
    return c;
}

ComponentDef parse_component(const json& j, const std::string& path,
                             const ExprContext& ctx) {
    if (j.is_string()) {
        try {
            return parse_expr(j.get<std::string>(), ctx);
        } catch (const ExprParseError& e) {
            fail(path, e.what());
        }
    }
    if (!j.is_object()) fail(path, "expected an expression string or an object");
    if (j.contains("expr")) {
        try {
            return parse_expr(j["expr"].get<std::string>(), ctx);
        } catch (const ExprParseError& e) {
            fail(path + ".expr", e.what());
        }
    }
    if (!j.contains("builtin")) fail(path, "component needs `expr` or `builtin`");
    const std::string kind = j["builtin"].get<std::string>();
    if (kind == "zero") return ZeroComponent{};
    if (kind == "diag_quad")
        return DiagQuadComponent{get_number(j, path, "gamma", 1.0),
                                 get_number(j, path, "sign", 1.0) >= 0 ? +1 : -1};
    if (kind == "linear_y") return LinearYComponent{get_number(j, path, "coef", 0.0)};
    if (kind == "linear_z") {
        LinearZComponent l;
        l.c = get_number(j, path, "c", 0.0);
        if (j.contains("mu")) {
            if (!j["mu"].is_array()) fail(path + ".mu", "expected an array");
            for (const auto& v : j["mu"]) l.mu.push_back(v.get<double>());
        }
        return l;
    }
    fail(path + ".builtin", "unknown builtin `" + kind + "`");
}

ConvexityTag parse_tag(const json& j, const std::string& path) {
    const std::string s = j.get<std::string>();
    if (s == "convex") return ConvexityTag::Convex;
    if (s == "concave") return ConvexityTag::Concave;
    if (s == "none") return ConvexityTag::None;
    fail(path, "expected convex|concave|none");
}

} // namespace

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig cfg;
    const auto params = parse_params(doc);
    cfg.model.constants = parse_constants(doc, params);
    const int n = cfg.model.constants.n;
    const int d = cfg.model.constants.d;

    if (!doc.contains("generator")) fail("generator", "missing block");
    const json& gen = doc["generator"];
    if (!gen.contains("components") || !gen["components"].is_array() ||
        gen["components"].empty())
        fail("generator.components", "missing or empty component list");
    const ExprContext gctx = ExprContext::generator(n, d, params);
    for (std::size_t i = 0; i < gen["components"].size(); ++i)
        cfg.model.components.push_back(parse_component(
            gen["components"][i], "generator.components[" + std::to_string(i) + "]",
            gctx));
    if (gen.contains("alpha")) {
        try {
            cfg.model.alpha =
                parse_expr(gen["alpha"].get<std::string>(), ExprContext::alpha(n, d, params));
        } catch (const ExprParseError& e) {
            fail("generator.alpha", e.what());
        }
    }
    if (gen.contains("diagonal"))
        for (const auto& v : gen["diagonal"]) cfg.model.diagonal.push_back(v.get<bool>());
    if (gen.contains("convexity"))
        for (std::size_t i = 0; i < gen["convexity"].size(); ++i)
            cfg.model.convexity.push_back(
                parse_tag(gen["convexity"][i], "generator.convexity[" + std::to_string(i) +
                                                   "]"));
    try {
        cfg.model.validate_shape();
    } catch (const ConfigError& e) {
        fail("generator", e.what());
    }

    if (!doc.contains("terminal")) fail("terminal", "missing block");
    const json& term = doc["terminal"];
    if (!term.contains("components") || !term["components"].is_array())
        fail("terminal.components", "missing component list");
    const ExprContext tctx = ExprContext::terminal(n, d, params);
    for (std::size_t i = 0; i < term["components"].size(); ++i) {
        try {
            cfg.terminal.h.push_back(
                parse_expr(term["components"][i].get<std::string>(), tctx));
        } catch (const ExprParseError& e) {
            fail("terminal.components[" + std::to_string(i) + "]", e.what());
        }
    }
    if (cfg.terminal.h.size() != static_cast<std::size_t>(n))
        fail("terminal.components", "expected n = " + std::to_string(n) + " entries");
    cfg.terminal.bounded = term.value("bounded", false);

    if (doc.contains("simulation")) {
        const json& sim = doc["simulation"];
        cfg.sim.M = static_cast<std::size_t>(get_number(sim, "simulation", "M", 20000));
        cfg.sim.N = static_cast<std::size_t>(get_number(sim, "simulation", "N", 50));
        cfg.sim.seed =
            static_cast<std::uint64_t>(get_number(sim, "simulation", "seed", 1));
        cfg.sim.basis_degree =
            static_cast<int>(get_number(sim, "simulation", "basis_degree", 4));
        cfg.sim.inner_iters =
            static_cast<int>(get_number(sim, "simulation", "inner_iters", 3));
        if (sim.contains("z_clip") && !sim["z_clip"].is_null())
            cfg.sim.z_clip = sim["z_clip"].get<double>();
        cfg.sim.antithetic = sim.value("antithetic", true);
        if (cfg.sim.M < 1 || cfg.sim.N < 1) fail("simulation", "M and N must be >= 1");
    }

    if (doc.contains("run")) {
        const json& run = doc["run"];
        if (run.contains("mode")) {
            const std::string m = run["mode"].get<std::string>();
            if (m == "picard")
                cfg.run.mode = RunMode::Picard;
            else if (m == "global")
                cfg.run.mode = RunMode::Global;
            else if (m == "local")
                cfg.run.mode = RunMode::Local;
            else
                fail("run.mode", "expected picard|global|local");
        }
        if (run.contains("plan")) {
            if (run["plan"].is_string()) {
                const std::string p = run["plan"].get<std::string>();
                if (p == "auto")
                    cfg.run.plan = PlanChoice::Auto;
                else if (p == "single")
                    cfg.run.plan = PlanChoice::Single;
                else
                    fail("run.plan", "expected auto|single|[boundaries]");
            } else if (run["plan"].is_array()) {
                cfg.run.plan = PlanChoice::Explicit;
                for (const auto& v : run["plan"]) cfg.run.plan_boundaries.push_back(
                    v.get<double>());
            } else {
                fail("run.plan", "expected auto|single|[boundaries]");
            }
        }
        if (run.contains("picard_mode")) {
            const std::string m = run["picard_mode"].get<std::string>();
            if (m == "frozen_y")
                cfg.run.picard_mode = PicardMode::FrozenY;
            else if (m == "frozen_yv")
                cfg.run.picard_mode = PicardMode::FrozenYV;
            else
                fail("run.picard_mode", "expected frozen_y|frozen_yv");
        }
        cfg.run.max_iters = static_cast<int>(get_number(run, "run", "max_iters", 30));
        cfg.run.tol = get_number(run, "run", "tol", 1e-4);
        cfg.run.window = static_cast<int>(get_number(run, "run", "window", 0));
        if (run.contains("theta"))
            for (const auto& v : run["theta"]) cfg.run.thetas.push_back(v.get<double>());
        if (run.contains("q")) {
            cfg.run.qs.clear();
            for (const auto& v : run["q"]) cfg.run.qs.push_back(v.get<double>());
        }
        cfg.run.validate = run.value("validate", true);
        cfg.run.override_validation = run.value("override_validation", false);
        cfg.run.samples =
            static_cast<std::size_t>(get_number(run, "run", "samples", 10000));
        cfg.run.boxes.r_y = get_number(run, "run", "r_y", 10.0);
        cfg.run.boxes.r_z = get_number(run, "run", "r_z", 10.0);
    }
    if (!cfg.run.thetas.empty() && cfg.run.window == 0) cfg.run.window = 6;

    cfg.resolved = doc;
    return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

} // namespace qbsde
