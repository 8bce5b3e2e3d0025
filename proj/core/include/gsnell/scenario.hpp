#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsnell/envelope.hpp"
#include "gsnell/expr.hpp"
#include "gsnell/harness.hpp"

namespace gsnell {

/// Raised for malformed configuration documents; names the offending field.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A process definition: exactly one of expression / explicit node table /
/// constant.
struct ProcessSpec {
    enum class Kind { unset, expression, table, constant };
    Kind kind = Kind::unset;
    Expression expression;
    std::vector<std::vector<double>> table;  // table[k] has k+1 values
    double constant = 0.0;
};

struct MeasureSpec {
    enum class Kind { zero, lebesgue, custom };
    Kind kind = Kind::zero;
    ProcessSpec increments;  // base increments for custom measures
    struct Atom {
        int step = 0;
        double mass = 0.0;
    };
    std::vector<Atom> atoms;
};

/// One scenario document: lattice geometry, the constraint processes, the
/// measure and run controls. See README for the schema.
struct ScenarioConfig {
    int steps = 1;
    double horizon = 1.0;
    double up_probability = 0.5;
    double s0 = 1.0;
    double sigma = 0.2;

    ProcessSpec lower;     // L (required)
    ProcessSpec obstacle;  // l (defaults to constant 0)
    ProcessSpec terminal;  // xi (defaults to L at the terminal level)
    MeasureSpec measure;

    PenaltySchedule schedule;
    double tol = 1e-8;
    bool full_schedule = false;
    std::uint64_t seed = 42;
    int minimality_trials = 32;
    int smallest_trials = 64;
    int suite_instances = 100;

    static ScenarioConfig from_json_text(const std::string& text);
    static ScenarioConfig from_file(const std::filesystem::path& path);

    TreeModel build_model() const;
    LowerData build_data(const TreeModel& model) const;
    EnvelopeOptions build_options() const;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 1;
inline constexpr int certificate_failure = 2;
inline constexpr int non_convergence = 3;
}  // namespace exit_code

struct RunReport {
    double root_value = 0.0;
    bool converged = true;
    double final_n = 0.0;
    double final_gap = 0.0;
    std::vector<TraceRow> trace;
    std::map<std::string, bool> certificates;
    double skorokhod_lower = 0.0;
    double skorokhod_upper = 0.0;
    double minimality_residual = 0.0;
    int smallest_violations = 0;
    std::vector<double> k_plus_profile;  // probability-weighted mass per step
    std::vector<SuiteReport> suites;
    double wall_ms = 0.0;
    int exit_status = exit_code::ok;

    std::string summary_json() const;
};

/// Full solve: envelope, certificates, node CSV + summary emitted when an
/// output directory is given. Exit status: 3 when the schedule ran out
/// above tolerance, 2 when a certificate failed, 0 otherwise.
RunReport run_solve(const ScenarioConfig& config,
                    const std::optional<std::filesystem::path>& out_dir);

/// Property suites: corollary, comparison, coincidence, atom-split or all.
RunReport run_properties(const ScenarioConfig& config, const std::string& suite,
                         const std::optional<std::filesystem::path>& out_dir);

/// Per-n table of root value, sup gap and reflection mass.
RunReport run_penalization_trace(const ScenarioConfig& config,
                                 const std::optional<std::filesystem::path>& out_dir);

/// Writes via a temporary file and rename so readers never observe a
/// partial document.
void atomic_write_file(const std::filesystem::path& path, const std::string& contents);

std::string format_double(double value);  // shortest round-trippable decimal

}  // namespace gsnell
