#pragma once

#include <string>

#include <json.hpp>

#include "qbsde/config.hpp"
#include "qbsde/stitcher.hpp"

namespace qbsde {

// Exit codes shared by the library entry points and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitConfig = 4;

struct ValidateOutcome {
    std::vector<ValidationReport> reports;
    std::vector<std::string> theorem_tags; // hypothesis sets that held empirically
    double terminal_sup = 0.0;
    bool terminal_bound_ok = true;
    bool b4_ok = true;                     // exponential moments of the data finite
    std::vector<double> b4_log_moments;    // log E[exp(p(|xi| + int alpha))], p = 1, 2, 4
    nlohmann::json to_json() const;
    std::string table() const;
    int exit_code() const;
};
ValidateOutcome run_validate(const ExperimentConfig& cfg);

struct BoundsOutcome {
    bounds::BoundReport report;
    nlohmann::json to_json() const;
    std::string table() const;
};
BoundsOutcome run_bounds(const ExperimentConfig& cfg, double q);

struct SolveOutcome {
    nlohmann::json summary;
    std::string trace_csv;
    bool converged = false;
    int exit_code = kExitOk;
    // Retained for dumps and the acceptance suite.
    BsdeSolution solution;
    std::uint64_t seed = 0;
};
// deterministic = exclude wall-clock data so identical configs give
// byte-identical summaries.
SolveOutcome run_solve(const ExperimentConfig& cfg, bool deterministic = false);

void dump_fields(const SolveOutcome& outcome, const ExperimentConfig& cfg,
                 const std::string& path);

struct VerifyCase {
    std::string name;
    std::vector<double> expected;
    std::vector<double> measured;
    double tolerance = 0.0;
    bool passed = false;
    std::string note;
};
struct VerifyOutcome {
    std::vector<VerifyCase> cases;
    bool all_passed = true;
    std::string table() const;
    nlohmann::json to_json() const;
};
VerifyOutcome run_verify(bool quick = false, const std::string& filter = "");

} // namespace qbsde
