#pragma once

#include <cstdint>
#include <random>

#include "gsnell/lattice.hpp"
#include "gsnell/measure.hpp"
#include "gsnell/penalize.hpp"

namespace gsnell {

/// Deterministic instance generator; every harness records its seed.
class InstanceRng {
public:
    explicit InstanceRng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi);
    int pick(int lo, int hi);  // inclusive
    bool chance(double p);
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

TreeModel random_tree(InstanceRng& rng, int min_depth, int max_depth, double horizon = 1.0);

AdaptedProcess random_process(InstanceRng& rng, int steps, double lo, double hi);

/// Backward construction: terminal values uniform, then one-step expectation
/// plus a nonnegative bump.
AdaptedProcess random_supermartingale(InstanceRng& rng, const TreeModel& model, double lo,
                                      double hi, double max_bump);

AdaptedProcess random_martingale(InstanceRng& rng, const TreeModel& model, double lo, double hi);

struct MeasureOptions {
    double step_charge_prob = 0.6;
    double node_charge_prob = 0.85;
    double mass_lo = 1.0;
    double mass_hi = 2.0;
    double atom_flag_prob = 0.35;
};

MonotoneMeasure random_measure(InstanceRng& rng, int steps, MeasureOptions options = {});

struct DataOptions {
    double value_lo = -1.0;
    double value_hi = 1.0;
    MeasureOptions measure;
};

LowerData random_lower_data(InstanceRng& rng, const TreeModel& model, DataOptions options = {});

}  // namespace gsnell
