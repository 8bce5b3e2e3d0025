#pragma once

#include <cstdint>
#include <string>

#include "gsnell/penalize.hpp"
#include "gsnell/snell.hpp"

namespace gsnell {

/// Conservative lattice left value: minimum of x over the path predecessors
/// of (step, node); the node's own value at the root.
double left_min(const AdaptedProcess& x, int step, int node);
AdaptedProcess left_min_process(const AdaptedProcess& x);

struct Certificates {
    SkorokhodResiduals skorokhod;
    MinimalityReport minimality;
    SmallestReport smallest_in_class;
    SupermartingaleReport supermartingale;
    bool all_ok() const {
        return skorokhod.ok() && minimality.ok() && smallest_in_class.ok() &&
               supermartingale.ok;
    }
};

struct EnvelopeResult {
    AdaptedProcess envelope;
    RbsdeSolution solution;
    Certificates certificates;
};

struct EnvelopeOptions {
    PenaltySchedule schedule;
    double tol = 1e-8;
    bool force_full_schedule = false;
    std::uint64_t seed = 0x5eed;
    int minimality_trials = 32;
    int smallest_trials = 64;
};

/// Smallest supermartingale dominating the constraint data, computed by the
/// penalized iteration, with the four certificates attached.
EnvelopeResult generalized_snell(const LowerData& data, const TreeModel& model,
                                 EnvelopeOptions options = {});

struct CheckReport {
    bool passed = false;
    bool precondition_ok = true;
    std::string detail;
    double worst = 0.0;
    int step = -1;
    int node = -1;
};

/// Replacing the charged obstacle by its join with the left value of the
/// barrier leaves the envelope unchanged.
CheckReport check_bar_substitution(const LowerData& data, const TreeModel& model,
                                   EnvelopeOptions options = {});

/// Smaller data (lower barriers and terminal value, thinner measure) yields
/// a smaller envelope. Preconditions are gated first.
CheckReport check_monotone(const LowerData& data, const LowerData& smaller,
                           const TreeModel& model, EnvelopeOptions options = {});

/// The envelope dominates the plain reflected solve of (L, xi), with
/// equality when the charged obstacles sit below the left values of L.
CheckReport check_domination(const LowerData& data, const TreeModel& model,
                             EnvelopeOptions options = {});

/// Any corridor data squeezed between the original constraints and the
/// computed envelope reproduces the envelope.
CheckReport check_sandwich(const LowerData& data, const LowerData& corridor,
                           const TreeModel& model, EnvelopeOptions options = {});

/// The corridor instance L* = envelope (terminal xi) in particular.
CheckReport check_sandwich_self(const LowerData& data, const TreeModel& model,
                                EnvelopeOptions options = {});

/// With zero measure the envelope coincides with the classical backward
/// induction, and with the exhaustive stopping-rule value at small depth.
CheckReport check_classical_coincidence(const AdaptedProcess& barrier, const TreeModel& model,
                                        EnvelopeOptions options = {});

/// Splits the measure into flagged atoms and the rest: obstacles are
/// dominated by the post value at unflagged charged nodes below the
/// terminal level, and by the pre-reflection (left-limit) value at atom
/// steps and at the terminal step.
CheckReport check_atom_split(const LowerData& data, const TreeModel& model,
                             EnvelopeOptions options = {}, double tol = 1e-5);

/// Uniformly charged measure (increment dt at every step). Requires
/// L <= l nodewise; certifies the obstacle constraint at every step.
EnvelopeResult lebesgue_example(const AdaptedProcess& lower, const AdaptedProcess& obstacle,
                                const std::vector<double>& terminal, const TreeModel& model,
                                EnvelopeOptions options = {});

}  // namespace gsnell
