#pragma once

#include <vector>

#include "gsnell/lattice.hpp"

namespace gsnell {

/// Nondecreasing adapted measure, stored as nonnegative per-node increments.
///
/// Convention: the increment held at node (k, j) is the mass the measure
/// assigns to step k (the interval ending at t_k) on paths through that
/// node. Input measures charge steps 1..steps; reflection processes
/// produced by the solvers charge at their decision node (k, j), k < steps,
/// meaning the push applied over (t_k, t_{k+1}] -- a predictable charge.
/// The cumulative process starts at zero either way.
///
/// atom_steps flags the steps whose mass is treated as a point jump of the
/// underlying process (left-limit semantics in the constraint checks).
class MonotoneMeasure {
public:
    MonotoneMeasure() = default;
    explicit MonotoneMeasure(int steps);

    static MonotoneMeasure zero(int steps);
    /// Increment dt at every node of steps 1..steps, no atoms.
    static MonotoneMeasure lebesgue(const TreeModel& model);

    int steps() const { return steps_; }
    bool empty() const { return steps_ < 0; }

    double increment(int step, int node) const;
    void set_increment(int step, int node, double mass);

    /// Adds `mass` at every node of `step` and flags the step as an atom.
    void add_atom(int step, double mass);
    void flag_atom(int step);
    const std::vector<int>& atom_steps() const { return atom_steps_; }
    bool is_atom_step(int step) const;

    bool charges(int step, int node) const { return increment(step, node) > 0.0; }
    bool step_charged(int step) const;

    bool same_shape(const MonotoneMeasure& other) const { return steps_ == other.steps_; }

    /// Expected total mass sum_{k,j} P(k,j) * increment(k,j).
    double weighted_total(const TreeModel& model) const;

    MonotoneMeasure& operator+=(const MonotoneMeasure& other);
    friend MonotoneMeasure operator+(MonotoneMeasure a, const MonotoneMeasure& b) {
        a += b;
        return a;
    }

private:
    void check(int step, int node) const;

    int steps_ = -1;
    std::vector<double> increments_;
    std::vector<int> atom_steps_;  // sorted, unique
};

/// Disjoint supports: no node carries positive mass of both measures.
bool singular(const MonotoneMeasure& a, const MonotoneMeasure& b);

/// a << b: every node charged by a is charged by b.
bool absolutely_continuous(const MonotoneMeasure& a, const MonotoneMeasure& b);

/// Same support.
bool equivalent(const MonotoneMeasure& a, const MonotoneMeasure& b);

struct AtomDecomposition {
    MonotoneMeasure continuous_part;
    std::vector<int> atoms;
};

/// Splits off the flagged steps; continuous_part + the atom-step increments
/// reproduce the input exactly.
AtomDecomposition decompose_atoms(const MonotoneMeasure& d);

}  // namespace gsnell
