#include "gsnell/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gsnell {

MonotoneMeasure::MonotoneMeasure(int steps) : steps_(steps) {
    if (steps < 1) throw std::invalid_argument("MonotoneMeasure: depth must be positive");
    increments_.assign(node_count(steps), 0.0);
}

MonotoneMeasure MonotoneMeasure::zero(int steps) { return MonotoneMeasure(steps); }

MonotoneMeasure MonotoneMeasure::lebesgue(const TreeModel& model) {
    MonotoneMeasure m(model.steps());
    const double dt = model.dt();
    for (int k = 1; k <= model.steps(); ++k)
        for (int j = 0; j <= k; ++j) m.set_increment(k, j, dt);
    return m;
}

void MonotoneMeasure::check(int step, int node) const {
    if (step < 0 || step > steps_ || node < 0 || node > step)
        throw std::out_of_range("MonotoneMeasure: node out of range");
}

double MonotoneMeasure::increment(int step, int node) const {
    check(step, node);
    return increments_[node_index(step, node)];
}

void MonotoneMeasure::set_increment(int step, int node, double mass) {
    check(step, node);
    if (!(mass >= 0.0) || !std::isfinite(mass))
        throw std::invalid_argument("MonotoneMeasure: increments must be nonnegative");
    increments_[node_index(step, node)] = mass;
}

void MonotoneMeasure::add_atom(int step, double mass) {
    if (step < 1 || step > steps_)
        throw std::out_of_range("MonotoneMeasure::add_atom: step outside 1..steps");
    if (!(mass >= 0.0)) throw std::invalid_argument("MonotoneMeasure::add_atom: negative mass");
    for (int j = 0; j <= step; ++j)
        increments_[node_index(step, j)] += mass;
    flag_atom(step);
}

void MonotoneMeasure::flag_atom(int step) {
    if (step < 1 || step > steps_)
        throw std::out_of_range("MonotoneMeasure::flag_atom: step outside 1..steps");
    auto it = std::lower_bound(atom_steps_.begin(), atom_steps_.end(), step);
    if (it == atom_steps_.end() || *it != step) atom_steps_.insert(it, step);
}

bool MonotoneMeasure::is_atom_step(int step) const {
    return std::binary_search(atom_steps_.begin(), atom_steps_.end(), step);
}

bool MonotoneMeasure::step_charged(int step) const {
    check(step, 0);
    for (int j = 0; j <= step; ++j)
        if (increments_[node_index(step, j)] > 0.0) return true;
    return false;
}

double MonotoneMeasure::weighted_total(const TreeModel& model) const {
    if (model.steps() != steps_)
        throw std::invalid_argument("MonotoneMeasure::weighted_total: model mismatch");
    double total = 0.0;
    for (int k = 0; k <= steps_; ++k) {
        const auto probs = model.level_probabilities(k);
        for (int j = 0; j <= k; ++j) total += probs[j] * increments_[node_index(k, j)];
    }
    return total;
}

MonotoneMeasure& MonotoneMeasure::operator+=(const MonotoneMeasure& other) {
    if (!same_shape(other)) throw std::invalid_argument("MonotoneMeasure: shape mismatch");
    for (std::size_t i = 0; i < increments_.size(); ++i) increments_[i] += other.increments_[i];
    for (int step : other.atom_steps_) flag_atom(step);
    return *this;
}

bool singular(const MonotoneMeasure& a, const MonotoneMeasure& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("singular: model mismatch");
    for (int k = 0; k <= a.steps(); ++k)
        for (int j = 0; j <= k; ++j)
            if (a.increment(k, j) > 0.0 && b.increment(k, j) > 0.0) return false;
    return true;
}

bool absolutely_continuous(const MonotoneMeasure& a, const MonotoneMeasure& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("absolutely_continuous: model mismatch");
    for (int k = 0; k <= a.steps(); ++k)
        for (int j = 0; j <= k; ++j)
            if (a.increment(k, j) > 0.0 && !(b.increment(k, j) > 0.0)) return false;
    return true;
}

bool equivalent(const MonotoneMeasure& a, const MonotoneMeasure& b) {
    return absolutely_continuous(a, b) && absolutely_continuous(b, a);
}

AtomDecomposition decompose_atoms(const MonotoneMeasure& d) {
    AtomDecomposition out;
    out.continuous_part = MonotoneMeasure(d.steps());
    out.atoms = d.atom_steps();
    for (int k = 0; k <= d.steps(); ++k) {
        if (d.is_atom_step(k)) continue;
        for (int j = 0; j <= k; ++j) out.continuous_part.set_increment(k, j, d.increment(k, j));
    }
    return out;
}

}  // namespace gsnell
