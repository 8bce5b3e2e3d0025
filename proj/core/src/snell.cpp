#include "gsnell/snell.hpp"

#include <algorithm>
#include <stdexcept>

namespace gsnell {

StoppingRule::StoppingRule(int steps) : steps_(steps) {
    if (steps < 0) throw std::invalid_argument("StoppingRule: negative depth");
    stop_.assign(node_count(steps), 0);
    for (int j = 0; j <= steps; ++j) stop_[node_index(steps, j)] = 1;  // forced at the horizon
}

bool StoppingRule::stops(int step, int node) const {
    if (step < 0 || step > steps_ || node < 0 || node > step)
        throw std::out_of_range("StoppingRule: node out of range");
    return stop_[node_index(step, node)] != 0;
}

void StoppingRule::set_stop(int step, int node, bool value) {
    if (step < 0 || step > steps_ || node < 0 || node > step)
        throw std::out_of_range("StoppingRule: node out of range");
    if (step == steps_ && !value)
        throw std::invalid_argument("StoppingRule: stopping is forced at the terminal level");
    stop_[node_index(step, node)] = value ? 1 : 0;
}

AdaptedProcess snell_envelope(const AdaptedProcess& payoff, const TreeModel& model) {
    if (payoff.steps() != model.steps())
        throw std::invalid_argument("snell_envelope: model mismatch");
    const int n = model.steps();
    const double p = model.up_probability;
    AdaptedProcess s(n);
    for (int j = 0; j <= n; ++j) s.at(n, j) = payoff.at(n, j);
    for (int k = n - 1; k >= 0; --k)
        for (int j = 0; j <= k; ++j) {
            const double cont = step_expectation(s.at(k + 1, j + 1), s.at(k + 1, j), p);
            s.at(k, j) = std::max(payoff.at(k, j), cont);
        }
    return s;
}

StoppingRule optimal_stopping_time(const AdaptedProcess& envelope, const AdaptedProcess& payoff) {
    if (envelope.steps() != payoff.steps())
        throw std::invalid_argument("optimal_stopping_time: shape mismatch");
    const int n = envelope.steps();
    StoppingRule rule(n);
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= k; ++j) {
            if (envelope.at(k, j) < payoff.at(k, j))
                throw std::invalid_argument(
                    "optimal_stopping_time: envelope below payoff (corrupted input)");
            if (k < n) rule.set_stop(k, j, envelope.at(k, j) <= payoff.at(k, j));
        }
    return rule;
}

double expected_stopped_value(const StoppingRule& rule, const AdaptedProcess& payoff,
                              const TreeModel& model) {
    if (rule.steps() != payoff.steps() || payoff.steps() != model.steps())
        throw std::invalid_argument("expected_stopped_value: shape mismatch");
    const int n = model.steps();
    const double p = model.up_probability;
    AdaptedProcess v(n);
    for (int j = 0; j <= n; ++j) v.at(n, j) = payoff.at(n, j);
    for (int k = n - 1; k >= 0; --k)
        for (int j = 0; j <= k; ++j)
            v.at(k, j) = rule.stops(k, j)
                             ? payoff.at(k, j)
                             : step_expectation(v.at(k + 1, j + 1), v.at(k + 1, j), p);
    return v.at(0, 0);
}

double brute_force_value(const AdaptedProcess& payoff, const TreeModel& model, int max_depth) {
    if (payoff.steps() != model.steps())
        throw std::invalid_argument("brute_force_value: model mismatch");
    const int n = model.steps();
    if (n > max_depth)
        throw std::invalid_argument("brute_force_value: depth exceeds the enumeration cap");
    const std::size_t interior = node_count(n - 1);
    const std::size_t rules = std::size_t{1} << interior;
    double best = payoff.at(0, 0);  // flags off everywhere except the forced horizon
    StoppingRule rule(n);
    for (std::size_t mask = 0; mask < rules; ++mask) {
        std::size_t bit = 0;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j <= k; ++j) rule.set_stop(k, j, (mask >> bit++) & 1);
        best = std::max(best, expected_stopped_value(rule, payoff, model));
    }
    return best;
}

}  // namespace gsnell
