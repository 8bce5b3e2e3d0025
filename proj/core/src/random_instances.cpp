#include "gsnell/random_instances.hpp"

#include <algorithm>

namespace gsnell {

double InstanceRng::uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

int InstanceRng::pick(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
}

bool InstanceRng::chance(double p) {
    return std::bernoulli_distribution(p)(engine_);
}

TreeModel random_tree(InstanceRng& rng, int min_depth, int max_depth, double horizon) {
    return TreeModel(TimeGrid(rng.pick(min_depth, max_depth), horizon), 0.5);
}

AdaptedProcess random_process(InstanceRng& rng, int steps, double lo, double hi) {
    return AdaptedProcess::build(steps, [&](int, int) { return rng.uniform(lo, hi); });
}

AdaptedProcess random_supermartingale(InstanceRng& rng, const TreeModel& model, double lo,
                                      double hi, double max_bump) {
    const int n = model.steps();
    const double p = model.up_probability;
    AdaptedProcess x(n);
    for (int j = 0; j <= n; ++j) x.at(n, j) = rng.uniform(lo, hi);
    for (int k = n - 1; k >= 0; --k)
        for (int j = 0; j <= k; ++j)
            x.at(k, j) = step_expectation(x.at(k + 1, j + 1), x.at(k + 1, j), p) +
                         rng.uniform(0.0, max_bump);
    return x;
}

AdaptedProcess random_martingale(InstanceRng& rng, const TreeModel& model, double lo, double hi) {
    return random_supermartingale(rng, model, lo, hi, 0.0);
}

MonotoneMeasure random_measure(InstanceRng& rng, int steps, MeasureOptions options) {
    MonotoneMeasure m(steps);
    for (int k = 1; k <= steps; ++k) {
        if (!rng.chance(options.step_charge_prob)) continue;
        bool charged = false;
        for (int j = 0; j <= k; ++j) {
            if (!rng.chance(options.node_charge_prob)) continue;
            m.set_increment(k, j, rng.uniform(options.mass_lo, options.mass_hi));
            charged = true;
        }
        if (charged && rng.chance(options.atom_flag_prob)) m.flag_atom(k);
    }
    return m;
}

LowerData random_lower_data(InstanceRng& rng, const TreeModel& model, DataOptions options) {
    const int n = model.steps();
    LowerData data;
    data.lower_rcll = random_process(rng, n, options.value_lo, options.value_hi);
    data.lower_measurable = random_process(rng, n, options.value_lo, options.value_hi);
    data.measure = random_measure(rng, n, options.measure);
    data.terminal.resize(n + 1);
    for (int j = 0; j <= n; ++j)
        data.terminal[j] = rng.uniform(options.value_lo, options.value_hi);
    return data;
}

}  // namespace gsnell
