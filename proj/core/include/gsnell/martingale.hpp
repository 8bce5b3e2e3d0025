#pragma once

#include <vector>

#include "gsnell/lattice.hpp"

namespace gsnell {

/// E[x_{k+1} | F_k]: maps the k+1 values at level k+1 to k+1... values at
/// level k via the one-step transition. Throws if k+1 exceeds the depth.
std::vector<double> conditional_expectation(const AdaptedProcess& x, const TreeModel& model, int k);

/// Unconditional E[x_k] (tower composition down to the root in one sweep).
double path_expectation(const AdaptedProcess& x, const TreeModel& model, int k);

/// Z(k, j) = (x(k+1, j+1) - x(k+1, j)) / (2 sqrt(dt)). Requires the
/// symmetric walk (up_probability == 1/2); then
/// x_{k+1} = E[x_{k+1}|F_k] + Z * dB holds exactly at both children.
PredictableVolatility martingale_rep_coefficient(const AdaptedProcess& x, const TreeModel& model);

struct SupermartingaleReport {
    bool ok = true;
    double worst_excess = 0.0;  // max over nodes of E[x_{k+1}|F_k] - x_k
    int step = -1;
    int node = -1;
};

/// Certifies E[x_{k+1}|F_k] <= x_k + tol at every non-terminal node.
SupermartingaleReport is_supermartingale(const AdaptedProcess& x, const TreeModel& model,
                                         double tol = 1e-10);

}  // namespace gsnell
