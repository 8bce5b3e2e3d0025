// Command line front end: scenario solves, property suites and
// penalization traces over JSON scenario documents.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gsnell/scenario.hpp"

namespace {

struct SharedOptions {
    std::string config_path;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<double> max_n;
};

void add_shared(CLI::App* cmd, SharedOptions& opts) {
    cmd->add_option("config", opts.config_path, "scenario document (JSON)")->required();
    cmd->add_option_function<std::string>(
           "--out", [&opts](const std::string& dir) { opts.out_dir = dir; },
           "directory for CSV/summary output");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&opts](std::uint64_t s) { opts.seed = s; }, "override the scenario seed");
    cmd->add_option_function<double>(
        "--tol", [&opts](double t) { opts.tol = t; }, "override the convergence tolerance");
    cmd->add_option_function<double>(
        "--max-n", [&opts](double n) { opts.max_n = n; }, "override the largest penalty level");
}

gsnell::ScenarioConfig load(const SharedOptions& opts) {
    auto config = gsnell::ScenarioConfig::from_file(opts.config_path);
    if (opts.seed) config.seed = *opts.seed;
    if (opts.tol) {
        if (*opts.tol <= 0.0) throw gsnell::ConfigError("--tol must be positive");
        config.tol = *opts.tol;
    }
    if (opts.max_n) {
        if (*opts.max_n < config.schedule.first)
            throw gsnell::ConfigError("--max-n must be >= the first penalty level");
        config.schedule.last = *opts.max_n;
    }
    return config;
}

void print_trace(const gsnell::RunReport& report) {
    std::cout << "      n      root value        sup gap     K+ mass\n";
    for (const auto& row : report.trace) {
        std::printf("%9.0f  %14.10f  %13.4e  %10.6f\n", row.n, row.root_value, row.sup_gap,
                    row.k_plus_mass);
    }
}

void print_certificates(const gsnell::RunReport& report) {
    for (const auto& [name, passed] : report.certificates)
        std::cout << "  " << (passed ? "pass" : "FAIL") << "  " << name << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized Snell envelopes on binomial lattices"};
    app.require_subcommand(1);

    SharedOptions solve_opts, props_opts, trace_opts;
    std::string suite = "all";

    CLI::App* solve = app.add_subcommand("solve", "solve a scenario and certify the result");
    add_shared(solve, solve_opts);
    CLI::App* props = app.add_subcommand("properties", "run a property suite");
    add_shared(props, props_opts);
    props->add_option("--suite", suite,
                      "corollary | comparison | coincidence | atom-split | all");
    CLI::App* trace = app.add_subcommand("trace", "emit the penalization trajectory");
    add_shared(trace, trace_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            const auto report = gsnell::run_solve(load(solve_opts), solve_opts.out_dir);
            std::cout << "root value  " << gsnell::format_double(report.root_value) << "\n"
                      << "final n     " << report.final_n << " (gap "
                      << gsnell::format_double(report.final_gap)
                      << (report.converged ? ", converged" : ", NOT converged") << ")\n";
            print_certificates(report);
            return report.exit_status;
        }
        if (props->parsed()) {
            const auto report = gsnell::run_properties(load(props_opts), suite, props_opts.out_dir);
            for (const auto& s : report.suites) {
                std::cout << (s.passed() ? "pass" : "FAIL") << "  " << s.name << "  ("
                          << s.instances << " instances, worst " << s.worst << ", seed "
                          << s.seed << ")\n";
                for (const auto& detail : s.failure_details) std::cout << "      " << detail << "\n";
            }
            return report.exit_status;
        }
        const auto report = gsnell::run_penalization_trace(load(trace_opts), trace_opts.out_dir);
        print_trace(report);
        if (!report.converged)
            std::cout << "schedule exhausted above tolerance (final gap "
                      << gsnell::format_double(report.final_gap) << ")\n";
        return report.exit_status;
    } catch (const gsnell::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return gsnell::exit_code::config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return gsnell::exit_code::config_error;
    }
}
