#include "gsnell/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gsnell {

TimeGrid::TimeGrid(int steps_, double horizon_) : steps(steps_), horizon(horizon_) {
    if (steps < 1) throw std::invalid_argument("TimeGrid: steps must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
}

TreeModel::TreeModel(TimeGrid grid_, double up_probability_)
    : grid(grid_), up_probability(up_probability_) {
    if (!(up_probability > 0.0) || up_probability > 1.0)
        throw std::invalid_argument("TreeModel: up_probability must lie in (0, 1]");
}

double TreeModel::sqrt_dt() const { return std::sqrt(grid.dt()); }

double TreeModel::brownian(int k, int j) const {
    if (k < 0 || k > steps() || j < 0 || j > k)
        throw std::out_of_range("TreeModel::brownian: node out of range");
    return (2.0 * j - k) * sqrt_dt();
}

bool TreeModel::same_shape(const TreeModel& other) const {
    return grid.steps == other.grid.steps && grid.horizon == other.grid.horizon &&
           up_probability == other.up_probability;
}

std::vector<double> TreeModel::level_probabilities(int k) const {
    if (k < 0 || k > steps())
        throw std::out_of_range("TreeModel::level_probabilities: level out of range");
    std::vector<double> probs{1.0};
    const double p = up_probability;
    const double q = down_probability();
    for (int level = 0; level < k; ++level) {
        std::vector<double> next(level + 2, 0.0);
        for (int j = 0; j <= level; ++j) {
            next[j] += q * probs[j];
            next[j + 1] += p * probs[j];
        }
        probs = std::move(next);
    }
    return probs;
}

AdaptedProcess::AdaptedProcess(int steps, double fill) : steps_(steps) {
    if (steps < 0) throw std::invalid_argument("AdaptedProcess: negative depth");
    values_.assign(node_count(steps), fill);
}

AdaptedProcess AdaptedProcess::constant(int steps, double value) {
    return AdaptedProcess(steps, value);
}

AdaptedProcess AdaptedProcess::build(int steps, const std::function<double(int, int)>& f) {
    AdaptedProcess x(steps);
    for (int k = 0; k <= steps; ++k)
        for (int j = 0; j <= k; ++j) x.at(k, j) = f(k, j);
    return x;
}

void AdaptedProcess::check(int step, int node) const {
    if (step < 0 || step > steps_ || node < 0 || node > step)
        throw std::out_of_range("AdaptedProcess: node out of range");
}

double AdaptedProcess::at(int step, int node) const {
    check(step, node);
    return values_[node_index(step, node)];
}

double& AdaptedProcess::at(int step, int node) {
    check(step, node);
    return values_[node_index(step, node)];
}

std::span<const double> AdaptedProcess::level(int step) const {
    check(step, 0);
    return {values_.data() + node_index(step, 0), static_cast<std::size_t>(step + 1)};
}

std::span<double> AdaptedProcess::level(int step) {
    check(step, 0);
    return {values_.data() + node_index(step, 0), static_cast<std::size_t>(step + 1)};
}

PredictableVolatility::PredictableVolatility(int steps, double fill) : steps_(steps) {
    if (steps < 1) throw std::invalid_argument("PredictableVolatility: depth must be positive");
    values_.assign(node_count(steps - 1), fill);
}

void PredictableVolatility::check(int step, int node) const {
    if (step < 0 || step >= steps_ || node < 0 || node > step)
        throw std::out_of_range("PredictableVolatility: node out of range");
}

double PredictableVolatility::at(int step, int node) const {
    check(step, node);
    return values_[node_index(step, node)];
}

double& PredictableVolatility::at(int step, int node) {
    check(step, node);
    return values_[node_index(step, node)];
}

AdaptedProcess brownian_process(const TreeModel& model) {
    return AdaptedProcess::build(model.steps(),
                                 [&](int k, int j) { return model.brownian(k, j); });
}

AdaptedProcess nodewise_max(const AdaptedProcess& a, const AdaptedProcess& b) {
    if (a.steps() != b.steps()) throw std::invalid_argument("nodewise_max: shape mismatch");
    AdaptedProcess out(a.steps());
    for (std::size_t i = 0; i < out.data().size(); ++i)
        out.data()[i] = std::max(a.data()[i], b.data()[i]);
    return out;
}

AdaptedProcess nodewise_min(const AdaptedProcess& a, const AdaptedProcess& b) {
    if (a.steps() != b.steps()) throw std::invalid_argument("nodewise_min: shape mismatch");
    AdaptedProcess out(a.steps());
    for (std::size_t i = 0; i < out.data().size(); ++i)
        out.data()[i] = std::min(a.data()[i], b.data()[i]);
    return out;
}

AdaptedProcess shifted(const AdaptedProcess& a, double offset) {
    AdaptedProcess out = a;
    for (double& v : out.data()) v += offset;
    return out;
}

double sup_distance(const AdaptedProcess& a, const AdaptedProcess& b) {
    if (a.steps() != b.steps()) throw std::invalid_argument("sup_distance: shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

}  // namespace gsnell
