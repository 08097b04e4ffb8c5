#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "qbsde/parallel.hpp"
#include "qbsde/runs.hpp"

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw qbsde::ResourceError("cannot write " + path);
    os << content;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver and verification toolkit for multi-dimensional diagonally "
                 "quadratic BSDEs"};
    app.require_subcommand(1);

    unsigned threads = 1;
    app.add_option("--threads", threads, "worker thread cap")->capture_default_str();

    std::string config_path;
    std::string json_out;

    auto* validate = app.add_subcommand("validate", "run the assumption validators");
    validate->add_option("--config", config_path, "experiment config (JSON)")->required();
    std::size_t samples_override = 0;
    validate->add_option("--samples", samples_override, "override run.samples");
    std::uint64_t seed_override = 0;
    bool have_seed = false;
    validate->add_option("--seed", seed_override, "override simulation.seed")
        ->each([&](const std::string&) { have_seed = true; });
    validate->add_option("--json", json_out, "write the report as JSON to this file");

    auto* bounds_cmd = app.add_subcommand("bounds", "evaluate the explicit constants");
    bounds_cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
    double q = 2.0;
    bounds_cmd->add_option("--q", q, "exponential moment order")->capture_default_str();
    bounds_cmd->add_option("--json", json_out, "write the report as JSON to this file");

    auto* solve = app.add_subcommand("solve", "solve the configured instance");
    solve->add_option("--config", config_path, "experiment config (JSON)")->required();
    std::string out_dir = ".";
    solve->add_option("--out-dir", out_dir, "directory for summary.json / trace.csv")
        ->capture_default_str();
    bool deterministic = false;
    solve->add_flag("--deterministic", deterministic,
                    "exclude wall-clock data for byte-identical summaries");
    bool dump = false;
    solve->add_flag("--dump-fields", dump, "write the full (Y, Z) fields to fields.bin");

    auto* verify = app.add_subcommand("verify", "run the built-in oracle suite");
    bool quick = false;
    verify->add_flag("--quick", quick, "smaller ensembles, looser tolerances");
    std::string case_filter;
    verify->add_option("--case", case_filter, "only run cases whose name contains this");
    verify->add_option("--json", json_out, "write the report as JSON to this file");

    CLI11_PARSE(app, argc, argv);
    qbsde::set_max_threads(threads);

    try {
        if (validate->parsed()) {
            qbsde::ExperimentConfig cfg = qbsde::load_config(config_path);
            if (samples_override > 0) cfg.run.samples = samples_override;
            if (have_seed) cfg.sim.seed = seed_override;
            const qbsde::ValidateOutcome out = qbsde::run_validate(cfg);
            std::cout << out.table();
            if (!json_out.empty()) write_file(json_out, out.to_json().dump(2) + "\n");
            return out.exit_code();
        }
        if (bounds_cmd->parsed()) {
            const qbsde::ExperimentConfig cfg = qbsde::load_config(config_path);
            const qbsde::BoundsOutcome out = qbsde::run_bounds(cfg, q);
            std::cout << out.table();
            if (!json_out.empty()) write_file(json_out, out.to_json().dump(2) + "\n");
            return qbsde::kExitOk;
        }
        if (solve->parsed()) {
            const qbsde::ExperimentConfig cfg = qbsde::load_config(config_path);
            const qbsde::SolveOutcome out = qbsde::run_solve(cfg, deterministic);
            std::filesystem::create_directories(out_dir);
            write_file(out_dir + "/summary.json", out.summary.dump(2) + "\n");
            write_file(out_dir + "/trace.csv", out.trace_csv);
            if (dump && out.exit_code != qbsde::kExitValidation)
                qbsde::dump_fields(out, cfg, out_dir + "/fields.bin");
            std::cout << "status: " << out.summary["status"].get<std::string>() << "\n";
            if (out.summary.contains("y0"))
                std::cout << "y0 mean: " << out.summary["y0"]["mean"].dump() << "\n";
            return out.exit_code;
        }
        if (verify->parsed()) {
            const qbsde::VerifyOutcome out = qbsde::run_verify(quick, case_filter);
            std::cout << out.table();
            if (!json_out.empty()) write_file(json_out, out.to_json().dump(2) + "\n");
            return out.all_passed ? qbsde::kExitOk : 1;
        }
    } catch (const qbsde::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return qbsde::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
