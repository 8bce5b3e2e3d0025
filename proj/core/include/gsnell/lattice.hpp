#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gsnell {

// Flat storage offset for node (step, node) on a recombining lattice.
// Level k holds k+1 nodes; node j counts up-moves, 0 <= j <= k.
inline constexpr std::size_t node_index(int step, int node) noexcept {
    return static_cast<std::size_t>(step) * (step + 1) / 2 + node;
}

inline constexpr std::size_t node_count(int steps) noexcept {
    return static_cast<std::size_t>(steps + 1) * (steps + 2) / 2;
}

/// Uniform grid t_k = k * horizon / steps, k = 0..steps.
struct TimeGrid {
    int steps = 1;
    double horizon = 1.0;

    TimeGrid() = default;
    TimeGrid(int steps_, double horizon_);

    double dt() const { return horizon / steps; }
    double time(int k) const { return k * dt(); }
};

/// Recombining binomial walk: node (k, j) carries the Brownian value
/// (2j - k) * sqrt(dt), a martingale when up_probability = 1/2.
struct TreeModel {
    TimeGrid grid;
    double up_probability = 0.5;

    TreeModel() = default;
    explicit TreeModel(TimeGrid grid_, double up_probability_ = 0.5);

    int steps() const { return grid.steps; }
    double dt() const { return grid.dt(); }
    double sqrt_dt() const;
    double down_probability() const { return 1.0 - up_probability; }
    double brownian(int k, int j) const;

    bool same_shape(const TreeModel& other) const;

    /// Probabilities of the k+1 nodes at level k (Pascal recursion).
    std::vector<double> level_probabilities(int k) const;
};

// One-step conditional expectation. Every module routes averaging through
// this helper so that floating-point monotonicity arguments apply uniformly.
inline double step_expectation(double up_value, double down_value, double up_probability) {
    return up_probability * up_value + (1.0 - up_probability) * down_value;
}

/// One real value per lattice node, levels 0..steps. Adaptedness is
/// structural: the value at (k, j) depends on nothing else.
class AdaptedProcess {
public:
    AdaptedProcess() = default;
    explicit AdaptedProcess(int steps, double fill = 0.0);

    static AdaptedProcess constant(int steps, double value);
    static AdaptedProcess build(int steps, const std::function<double(int, int)>& f);

    int steps() const { return steps_; }
    bool empty() const { return steps_ < 0; }

    double at(int step, int node) const;
    double& at(int step, int node);

    std::span<const double> level(int step) const;
    std::span<double> level(int step);
    std::span<const double> terminal() const { return level(steps_); }

    const std::vector<double>& data() const { return values_; }
    std::vector<double>& data() { return values_; }

private:
    void check(int step, int node) const;

    int steps_ = -1;
    std::vector<double> values_;
};

/// One value per node at levels 0..steps-1 (decided one step ahead of the
/// branch it multiplies).
class PredictableVolatility {
public:
    PredictableVolatility() = default;
    explicit PredictableVolatility(int steps, double fill = 0.0);

    int steps() const { return steps_; }
    double at(int step, int node) const;
    double& at(int step, int node);
    const std::vector<double>& data() const { return values_; }

private:
    void check(int step, int node) const;

    int steps_ = -1;
    std::vector<double> values_;
};

AdaptedProcess brownian_process(const TreeModel& model);
AdaptedProcess nodewise_max(const AdaptedProcess& a, const AdaptedProcess& b);
AdaptedProcess nodewise_min(const AdaptedProcess& a, const AdaptedProcess& b);
AdaptedProcess shifted(const AdaptedProcess& a, double offset);

/// Largest |a - b| over all nodes.
double sup_distance(const AdaptedProcess& a, const AdaptedProcess& b);

}  // namespace gsnell
