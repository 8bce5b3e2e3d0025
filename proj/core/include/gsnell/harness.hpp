#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gsnell {

struct SuiteReport {
    std::string name;
    int instances = 0;
    int failures = 0;
    double worst = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> failure_details;
    bool passed() const { return failures == 0; }
};

/// Envelope-vs-backward-induction agreement on random barriers, plus the
/// exhaustive stopping-rule oracle at shallow depth.
SuiteReport run_coincidence_suite(std::uint64_t seed, int depth, int instances,
                                  int brute_instances, double tol = 1e-8,
                                  double brute_tol = 1e-12);

/// The four envelope identities/inequalities on random instances.
SuiteReport run_corollary_suite(std::uint64_t seed, int depth, int instances, double tol = 1e-8);

/// Randomized hypothesis-satisfying comparison pairs; conclusions asserted
/// at `tol`.
SuiteReport run_comparison_suite(std::uint64_t seed, int depth, int pairs, double tol = 1e-10);

/// Obstacle constraints split by atom flags on random instances carrying
/// interior and terminal atoms.
SuiteReport run_atom_split_suite(std::uint64_t seed, int depth, int instances);

}  // namespace gsnell
