#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbsde/generator.hpp"
#include "qbsde/picard.hpp"

namespace qbsde {

enum class RunMode { Picard, Global, Local };
enum class PlanChoice { Auto, Single, Explicit };

// One experiment, fully described by a single JSON document: constants,
// generator, terminal, simulation sizes and run orchestration.
struct ExperimentConfig {
    GeneratorModel model; // constants live inside
    TerminalCondition terminal;

    struct Simulation {
        std::size_t M = 20000;
        std::size_t N = 50;
        std::uint64_t seed = 1;
        int basis_degree = 4;
        int inner_iters = 3;
        std::optional<double> z_clip;
        bool antithetic = true;
    } sim;

    struct Run {
        RunMode mode = RunMode::Picard;
        PlanChoice plan = PlanChoice::Auto;
        std::vector<double> plan_boundaries; // explicit plan, descending times
        PicardMode picard_mode = PicardMode::FrozenY;
        int max_iters = 30;
        double tol = 1e-4;
        int window = 0;
        std::vector<double> thetas;
        std::vector<double> qs{2.0};
        bool validate = true;
        bool override_validation = false;
        std::size_t samples = 10000;
        ValidatorOptions boxes;
    } run;

    nlohmann::json resolved; // the fully resolved document, for reports
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

} // namespace qbsde
