#include "gsnell/martingale.hpp"

#include <cmath>
#include <stdexcept>

namespace gsnell {

std::vector<double> conditional_expectation(const AdaptedProcess& x, const TreeModel& model,
                                            int k) {
    if (x.steps() != model.steps())
        throw std::invalid_argument("conditional_expectation: model mismatch");
    if (k < 0 || k + 1 > model.steps())
        throw std::out_of_range("conditional_expectation: step index out of range");
    const double p = model.up_probability;
    std::vector<double> values(k + 1);
    for (int j = 0; j <= k; ++j)
        values[j] = step_expectation(x.at(k + 1, j + 1), x.at(k + 1, j), p);
    return values;
}

double path_expectation(const AdaptedProcess& x, const TreeModel& model, int k) {
    if (k < 0 || k > model.steps())
        throw std::out_of_range("path_expectation: step index out of range");
    const auto probs = model.level_probabilities(k);
    double total = 0.0;
    for (int j = 0; j <= k; ++j) total += probs[j] * x.at(k, j);
    return total;
}

PredictableVolatility martingale_rep_coefficient(const AdaptedProcess& x, const TreeModel& model) {
    if (x.steps() != model.steps())
        throw std::invalid_argument("martingale_rep_coefficient: model mismatch");
    if (model.up_probability != 0.5)
        throw std::invalid_argument(
            "martingale_rep_coefficient: defined for the symmetric walk only");
    const double scale = 2.0 * model.sqrt_dt();
    PredictableVolatility z(model.steps());
    for (int k = 0; k < model.steps(); ++k)
        for (int j = 0; j <= k; ++j) z.at(k, j) = (x.at(k + 1, j + 1) - x.at(k + 1, j)) / scale;
    return z;
}

SupermartingaleReport is_supermartingale(const AdaptedProcess& x, const TreeModel& model,
                                         double tol) {
    if (x.steps() != model.steps())
        throw std::invalid_argument("is_supermartingale: model mismatch");
    SupermartingaleReport report;
    const double p = model.up_probability;
    for (int k = 0; k < model.steps(); ++k) {
        for (int j = 0; j <= k; ++j) {
            const double e = step_expectation(x.at(k + 1, j + 1), x.at(k + 1, j), p);
            const double excess = e - x.at(k, j);
            if (excess > report.worst_excess) {
                report.worst_excess = excess;
                report.step = k;
                report.node = j;
            }
        }
    }
    report.ok = report.worst_excess <= tol;
    return report;
}

}  // namespace gsnell
