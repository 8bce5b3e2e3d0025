#pragma once

#include <string>
#include <vector>

#include "gsnell/generator.hpp"
#include "gsnell/lattice.hpp"
#include "gsnell/martingale.hpp"
#include "gsnell/measure.hpp"

namespace gsnell {

/// Two-barrier problem data (terminal condition, driver, driving measure,
/// lower and upper barriers). Barriers must satisfy lower <= upper at every
/// node below the terminal level.
struct GrbsdeProblem {
    std::vector<double> terminal;  // xi, one value per terminal node
    Generator generator;
    MonotoneMeasure measure;
    AdaptedProcess lower;
    AdaptedProcess upper;

    int steps() const { return lower.steps(); }
    void validate(const TreeModel& model) const;
};

/// Backward-recursion output. In addition to (y, z, k_plus, k_minus) the
/// solver records, per decision node (k, j) with k < N:
///   pre_reflection: the root y* of y = e + drive(y) before clamping --
///       the lattice stand-in for the left limit of y at the next step;
///   drift: the drive value actually charged, i.e. y* - e.
/// The backward identity
///   y_k = y_{k+1} + drift_k + dK+_k - dK-_k - z_k dB
/// then holds at both children up to roundoff.
struct GrbsdeSolution {
    AdaptedProcess y;
    PredictableVolatility z;
    MonotoneMeasure k_plus;
    MonotoneMeasure k_minus;
    AdaptedProcess pre_reflection;
    PredictableVolatility drift;
};

/// Solves the two-barrier equation by backward induction. The measure mass
/// of step k+1 is consumed in the backward step that computes level k, with
/// the driver evaluated at the child nodes and the pre-reflection value as
/// the y-argument (implicit step). Reflection increments are the clamp
/// residuals; when lower == upper the upward push wins unless the root
/// overshoots the upper barrier.
GrbsdeSolution solve_two_barrier(const GrbsdeProblem& problem, const TreeModel& model);

struct ImplicitStepResult {
    double y = 0.0;        // clamped value
    double dk_plus = 0.0;  // (lo - (y* ^ hi))^+
    double dk_minus = 0.0; // ((y* v lo) - hi)^+
    double pre = 0.0;      // unclamped root y*
};

/// Single-node implicit step: solves y = e + g(k, j, y) * ddelta, then
/// clamps to [lo, hi]. Closed form for penalty/affine shapes, bracketed
/// bisection otherwise (tolerance 1e-12, bracket doubled up to 50 times).
ImplicitStepResult implicit_step(double e, const Generator& gen, int step, int node,
                                 double ddelta, double lo, double hi);

struct HReport {
    double max_bound_violation = 0.0;   // max over samples of |g| - bound
    double continuity_coarse = 0.0;     // |g(y+h) - g(y)| at h
    double continuity_fine = 0.0;       // same at h/16
    bool continuity_suspect = false;    // fine residual failed to shrink
    SupermartingaleReport upper_barrier;
    bool ok() const {
        return max_bound_violation <= 1e-9 && !continuity_suspect && upper_barrier.ok;
    }
};

/// Report-only validation of the driver bound, driver continuity and the
/// supermartingale property of the upper barrier.
HReport validate_H(const GrbsdeProblem& problem, const TreeModel& model, int y_samples = 21);

struct SkorokhodResiduals {
    double lower_residual = 0.0;  // sum P * (y - lower) * dK+
    double upper_residual = 0.0;  // sum P * (upper - y) * dK-
    bool ok(double tol = 1e-10) const {
        return lower_residual <= tol && upper_residual <= tol;
    }
};

SkorokhodResiduals check_skorokhod(const GrbsdeSolution& solution, const GrbsdeProblem& problem,
                                   const TreeModel& model);

/// Reference solution driven by a fixed nondecreasing process dA' in place
/// of g ddelta, for the comparison harness.
struct ComparisonInstance {
    std::vector<double> terminal;
    MonotoneMeasure drive;
    AdaptedProcess lower;
    AdaptedProcess upper;
    GrbsdeSolution solution;
};

ComparisonInstance solve_measure_driven(std::vector<double> terminal, MonotoneMeasure drive,
                                        AdaptedProcess lower, AdaptedProcess upper,
                                        const TreeModel& model);

struct ComparisonReport {
    bool hypotheses_ok = true;
    std::string failing_hypothesis;
    bool value_ok = true;       // y <= y' nodewise
    bool k_plus_ok = true;      // dK'+ <= dK+ where lower barriers coincide
    bool k_minus_ok = true;     // dK- <= dK'- where upper barriers coincide
    double worst_value_violation = 0.0;
    double worst_k_plus_violation = 0.0;
    double worst_k_minus_violation = 0.0;
    int counterexample_step = -1;
    int counterexample_node = -1;
    bool ok() const { return hypotheses_ok && value_ok && k_plus_ok && k_minus_ok; }
};

/// Comparison of a minimal two-barrier solution against a measure-driven
/// solution. Hypotheses checked first (terminal order, barrier coupling in
/// both directions, driver domination at the primed left values); the
/// conclusion inequalities are asserted at `tol`.
ComparisonReport compare_minimal(const GrbsdeProblem& problem, const GrbsdeSolution& solution,
                                 const ComparisonInstance& primed, const TreeModel& model,
                                 double tol = 1e-10);

}  // namespace gsnell
