#pragma once

#include <functional>
#include <string>

#include "gsnell/lattice.hpp"

namespace gsnell {

/// Driver term g(k, j, y) integrated against a monotone measure, together
/// with a per-node bound on |g| over the clamped argument range.
///
/// `form` lets the solver pick an exact closed-form root where the shape is
/// known; `custom` falls back to bracketed bisection.
struct Generator {
    enum class Form {
        custom,      // arbitrary continuous g, bisection
        zero,        // g == 0
        unit_drive,  // g == 1 (measure-driven comparison instances)
        penalty,     // g(k,j,y) = intensity * max(obstacle(k,j) - y, 0)
    };

    std::string label;
    Form form = Form::custom;
    AdaptedProcess bound;
    std::function<double(int, int, double)> evaluate;

    // populated when form == penalty
    double penalty_intensity = 0.0;
    AdaptedProcess penalty_obstacle;

    double operator()(int step, int node, double y) const { return evaluate(step, node, y); }

    static Generator zero(int steps);
    static Generator unit_drive(int steps);
};

}  // namespace gsnell
