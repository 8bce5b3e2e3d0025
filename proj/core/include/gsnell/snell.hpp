#pragma once

#include <vector>

#include "gsnell/lattice.hpp"

namespace gsnell {

/// Stop flag per node; a path stops at its first flagged node, and stopping
/// is forced at the terminal level.
class StoppingRule {
public:
    StoppingRule() = default;
    explicit StoppingRule(int steps);

    int steps() const { return steps_; }
    bool stops(int step, int node) const;
    void set_stop(int step, int node, bool value);

private:
    int steps_ = -1;
    std::vector<unsigned char> stop_;
};

/// Smallest supermartingale dominating the payoff:
/// S_N = payoff_N, S_k = max(payoff_k, E[S_{k+1} | F_k]).
AdaptedProcess snell_envelope(const AdaptedProcess& payoff, const TreeModel& model);

/// First time the envelope touches the payoff. Requires envelope >= payoff.
StoppingRule optimal_stopping_time(const AdaptedProcess& envelope, const AdaptedProcess& payoff);

/// Expected payoff collected by following the rule (first flagged node wins).
double expected_stopped_value(const StoppingRule& rule, const AdaptedProcess& payoff,
                              const TreeModel& model);

/// Exhaustive maximum of the expected stopped payoff over all per-node flag
/// assignments. 2^(interior nodes) evaluations; refuses depth > max_depth.
double brute_force_value(const AdaptedProcess& payoff, const TreeModel& model, int max_depth = 4);

}  // namespace gsnell
