#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gsnell/grbsde.hpp"
#include "gsnell/lattice.hpp"
#include "gsnell/measure.hpp"

namespace gsnell {

/// Lower-constraint data: terminal values xi, a barrier that binds at every
/// node below the terminal level (lower_rcll), a barrier that binds only
/// where the measure charges (lower_measurable), and the measure itself.
struct LowerData {
    std::vector<double> terminal;
    AdaptedProcess lower_rcll;        // L
    AdaptedProcess lower_measurable;  // l
    MonotoneMeasure measure;          // delta

    int steps() const { return lower_rcll.steps(); }
};

/// g(k, j, y) = intensity * max(obstacle(k, j) - y, 0). The bound process
/// is intensity * max(obstacle - clamp_low, 0), valid for arguments clamped
/// below by clamp_low.
Generator penalty_generator(double intensity, const AdaptedProcess& obstacle,
                            const AdaptedProcess& clamp_low);
Generator penalty_generator(double intensity, const AdaptedProcess& obstacle);

/// Martingale dominating all three constraints. Built as the conditional
/// expectation of the forward-propagated running maximum of the constraint
/// profile; the profile includes, at each node, the charged obstacles one
/// step ahead, so the martingale also dominates in the left-limit sense
/// required of upper bounds for the penalized solves.
AdaptedProcess default_dominating_martingale(const LowerData& data, const TreeModel& model);

/// Supermartingale alternative: pathwise future maximum of the same
/// constraint profile. Structurally different from the martingale, used to
/// exercise independence of the penalized solves from the bound choice.
AdaptedProcess dominating_running_max(const LowerData& data, const TreeModel& model);

struct MembershipReport {
    bool ok = true;
    std::string reason;
    int step = -1;
    int node = -1;
};

/// Checks that v is a supermartingale with v >= L below the terminal level,
/// xi <= v at the terminal level, and l(s, c) <= v(s-1, parent) for every
/// parent of every charged node (left-limit domination).
MembershipReport check_dominating(const AdaptedProcess& v, const LowerData& data,
                                  const TreeModel& model, double supermartingale_tol = 1e-12);

/// One penalized solve at penalty level n with upper bound v. Rejects v
/// that fails check_dominating, and verifies that the downward reflection
/// K- vanished (it must, for a valid dominating process).
GrbsdeSolution solve_penalized(double n, const LowerData& data, const AdaptedProcess& v,
                               const TreeModel& model);

/// Closed-form root of y = xi + n * max(terminal_obstacle - y, 0) * atom_mass,
/// clamped to [lo, hi]:
///   xi >= obstacle: clamp(xi)
///   else:           clamp((xi + n * obstacle * mass) / (1 + n * mass))
double terminal_atom_fixpoint(double xi, double terminal_obstacle, double atom_mass, double n,
                              double lo, double hi);

struct PenaltySchedule {
    double first = 1.0;
    double growth = 2.0;
    double last = 1048576.0;  // 2^20
};

struct TraceRow {
    double n = 0.0;
    double root_value = 0.0;
    double sup_gap = 0.0;
    double k_plus_mass = 0.0;
};

/// Penalized iteration output: the last iterate plus convergence
/// diagnostics. pre_reflection carries the per-node implicit-step roots of
/// the final solve (the left-limit values used by the atom checks).
struct RbsdeSolution {
    AdaptedProcess y;
    PredictableVolatility z;
    MonotoneMeasure k_plus;
    AdaptedProcess pre_reflection;
    PredictableVolatility drift;

    struct Diagnostics {
        double final_n = 0.0;
        double sup_gap = 0.0;
        double constraint_gap = 0.0;  // worst charged-obstacle deficit at the last solve
        double monotonicity_violation = 0.0;
        double sandwich_violation = 0.0;
        bool converged = false;
        int solves = 0;
        std::vector<TraceRow> trace;
    } diagnostics;
};

/// Runs the penalty schedule (with an n = 0 baseline) against the default
/// dominating martingale, enforcing the monotone chain between consecutive
/// iterates. Stops early only once both the sup-norm gap between
/// consecutive iterates and the charged-obstacle deficit sit below tol; the
/// gap alone can vanish while an obstacle is still masked by the lower
/// clamp. force_full_schedule disables early stopping.
RbsdeSolution iterate_to_limit(const LowerData& data, const TreeModel& model,
                               PenaltySchedule schedule = {}, double tol = 1e-8,
                               bool force_full_schedule = false);

/// Direct single-barrier solve against the effective barrier
/// max(L, one-step lookahead of charged obstacles): the exact limit of the
/// penalized iteration, used as a cross-check.
AdaptedProcess effective_barrier_solve(const LowerData& data, const TreeModel& model);

struct MinimalityReport {
    double worst_residual = 0.0;
    double k_plus_mass = 0.0;
    int barriers_tested = 0;
    std::uint64_t seed = 0;
    bool ok(double tol = 1e-8) const {
        return worst_residual <= tol * (1.0 + k_plus_mass);
    }
};

/// Flat-off-the-contact-set test: sum P * (y - L*) * dK+ for the canonical
/// effective barrier and `trials` randomized corridor barriers L <= L* <= y.
MinimalityReport check_minimality(const RbsdeSolution& solution, const LowerData& data,
                                  const TreeModel& model, int trials = 32,
                                  std::uint64_t seed = 0x5eed1);

struct SmallestReport {
    int samples = 0;
    int violations = 0;
    double worst_violation = 0.0;
    int counterexample_sample = -1;  // index of a violating member, if any
    int counterexample_step = -1;
    int counterexample_node = -1;
    std::uint64_t seed = 0;
    bool ok() const { return violations == 0; }
};

/// Samples dominating supermartingales and verifies y <= V nodewise
/// (violations counted above 1e-12).
SmallestReport check_smallest_in_class(const RbsdeSolution& solution, const LowerData& data,
                                       const TreeModel& model, int trials = 64,
                                       std::uint64_t seed = 0x5eed2);

}  // namespace gsnell
