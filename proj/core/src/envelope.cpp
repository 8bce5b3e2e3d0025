#include "gsnell/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gsnell {

double left_min(const AdaptedProcess& x, int step, int node) {
    if (step == 0) return x.at(0, 0);
    double v = std::numeric_limits<double>::infinity();
    if (node <= step - 1) v = std::min(v, x.at(step - 1, node));
    if (node >= 1) v = std::min(v, x.at(step - 1, node - 1));
    return v;
}

AdaptedProcess left_min_process(const AdaptedProcess& x) {
    return AdaptedProcess::build(x.steps(), [&](int k, int j) { return left_min(x, k, j); });
}

EnvelopeResult generalized_snell(const LowerData& data, const TreeModel& model,
                                 EnvelopeOptions options) {
    EnvelopeResult result;
    result.solution = iterate_to_limit(data, model, options.schedule, options.tol,
                                       options.force_full_schedule);
    result.envelope = result.solution.y;

    GrbsdeProblem final_problem;
    final_problem.terminal = data.terminal;
    final_problem.generator = penalty_generator(result.solution.diagnostics.final_n,
                                                data.lower_measurable, data.lower_rcll);
    final_problem.measure = data.measure;
    final_problem.lower = data.lower_rcll;
    final_problem.upper = default_dominating_martingale(data, model);

    GrbsdeSolution grbsde;
    grbsde.y = result.solution.y;
    grbsde.z = result.solution.z;
    grbsde.k_plus = result.solution.k_plus;
    grbsde.k_minus = MonotoneMeasure::zero(model.steps());
    result.certificates.skorokhod = check_skorokhod(grbsde, final_problem, model);
    result.certificates.minimality = check_minimality(result.solution, data, model,
                                                      options.minimality_trials, options.seed);
    result.certificates.smallest_in_class = check_smallest_in_class(
        result.solution, data, model, options.smallest_trials, options.seed + 1);
    result.certificates.supermartingale = is_supermartingale(result.envelope, model, 1e-10);
    return result;
}

namespace {

std::string node_text(int k, int j) {
    std::ostringstream os;
    os << "(" << k << ", " << j << ")";
    return os.str();
}

void record_worst(CheckReport& report, double value, int k, int j) {
    if (value > report.worst) {
        report.worst = value;
        report.step = k;
        report.node = j;
    }
}

}  // namespace

CheckReport check_bar_substitution(const LowerData& data, const TreeModel& model,
                                   EnvelopeOptions options) {
    CheckReport report;
    LowerData substituted = data;
    substituted.lower_measurable = AdaptedProcess::build(data.steps(), [&](int k, int j) {
        return std::max(data.lower_measurable.at(k, j), left_min(data.lower_rcll, k, j));
    });
    const auto base = generalized_snell(data, model, options);
    const auto subst = generalized_snell(substituted, model, options);
    for (int k = 0; k <= model.steps(); ++k)
        for (int j = 0; j <= k; ++j)
            record_worst(report,
                         std::abs(base.envelope.at(k, j) - subst.envelope.at(k, j)), k, j);
    report.passed = report.worst <= 1e-8;
    if (!report.passed)
        report.detail = "envelopes differ at " + node_text(report.step, report.node);
    return report;
}

CheckReport check_monotone(const LowerData& data, const LowerData& smaller,
                           const TreeModel& model, EnvelopeOptions options) {
    CheckReport report;
    const int n = model.steps();
    auto reject = [&](const std::string& what, int k, int j) {
        report.precondition_ok = false;
        report.passed = false;
        report.detail = what + " violated at " + node_text(k, j);
    };
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= k; ++j)
            if (smaller.lower_rcll.at(k, j) > data.lower_rcll.at(k, j)) {
                reject("L' <= L", k, j);
                return report;
            }
    if (!absolutely_continuous(smaller.measure, data.measure)) {
        reject("ddelta' << ddelta", -1, -1);
        return report;
    }
    for (int s = 1; s <= n; ++s)
        for (int c = 0; c <= s; ++c)
            if (smaller.measure.charges(s, c) &&
                smaller.lower_measurable.at(s, c) > data.lower_measurable.at(s, c)) {
                reject("l' <= l on charged nodes", s, c);
                return report;
            }
    for (int j = 0; j <= n; ++j)
        if (smaller.terminal[j] > data.terminal[j]) {
            reject("xi' <= xi", n, j);
            return report;
        }

    const auto big = generalized_snell(data, model, options);
    const auto small = generalized_snell(smaller, model, options);
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= k; ++j)
            record_worst(report, small.envelope.at(k, j) - big.envelope.at(k, j), k, j);
    report.passed = report.worst <= 1e-8;
    if (!report.passed)
        report.detail = "ordering fails at " + node_text(report.step, report.node);
    return report;
}

CheckReport check_domination(const LowerData& data, const TreeModel& model,
                             EnvelopeOptions options) {
    CheckReport report;
    const int n = model.steps();

    // plain reflected solve of (L, xi)
    AdaptedProcess barrier_with_terminal = data.lower_rcll;
    for (int j = 0; j <= n; ++j) barrier_with_terminal.at(n, j) = data.terminal[j];
    const AdaptedProcess classical = snell_envelope(barrier_with_terminal, model);

    const auto result = generalized_snell(data, model, options);

    bool equality_expected = true;
    for (int s = 1; s <= n && equality_expected; ++s)
        for (int c = 0; c <= s && equality_expected; ++c)
            if (data.measure.charges(s, c) &&
                data.lower_measurable.at(s, c) > left_min(data.lower_rcll, s, c))
                equality_expected = false;

    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= k; ++j) {
            const double deficit = classical.at(k, j) - result.envelope.at(k, j);
            const double gap = equality_expected
                                   ? std::abs(result.envelope.at(k, j) - classical.at(k, j))
                                   : deficit;
            record_worst(report, gap, k, j);
        }
    report.passed = report.worst <= 1e-8;
    if (!report.passed)
        report.detail = std::string(equality_expected ? "equality" : "domination") +
                        " fails at " + node_text(report.step, report.node);
    return report;
}

CheckReport check_sandwich(const LowerData& data, const LowerData& corridor,
                           const TreeModel& model, EnvelopeOptions options) {
    CheckReport report;
    const int n = model.steps();
    const auto base = generalized_snell(data, model, options);
    const AdaptedProcess& y = base.envelope;

    auto reject = [&](const std::string& what, int k, int j) {
        report.precondition_ok = false;
        report.passed = false;
        report.detail = what + " violated at " + node_text(k, j);
    };
    if (!equivalent(data.measure, corridor.measure)) {
        reject("ddelta ~ ddelta'", -1, -1);
        return report;
    }
    for (int k = 0; k < n; ++k)
        for (int j = 0; j <= k; ++j) {
            if (corridor.lower_rcll.at(k, j) < data.lower_rcll.at(k, j) ||
                corridor.lower_rcll.at(k, j) > y.at(k, j)) {
                reject("L <= L' <= Y", k, j);
                return report;
            }
        }
    const double corridor_slack = 1e-5;  // penalization floor of the reference solve
    for (int s = 1; s <= n; ++s)
        for (int c = 0; c <= s; ++c) {
            if (!data.measure.charges(s, c)) continue;
            if (corridor.lower_measurable.at(s, c) <
                    data.lower_measurable.at(s, c) - 1e-12 ||
                corridor.lower_measurable.at(s, c) > left_min(y, s, c) + corridor_slack) {
                reject("l <= l' <= Y_left on charged nodes", s, c);
                return report;
            }
        }
    for (int j = 0; j <= n; ++j)
        if (corridor.terminal[j] != data.terminal[j]) {
            reject("xi' == xi", n, j);
            return report;
        }

    const auto squeezed = generalized_snell(corridor, model, options);
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= k; ++j)
            record_worst(report, std::abs(squeezed.envelope.at(k, j) - y.at(k, j)), k, j);
    report.passed = report.worst <= 1e-8;
    if (!report.passed)
        report.detail = "corridor envelope differs at " + node_text(report.step, report.node);
    return report;
}

CheckReport check_sandwich_self(const LowerData& data, const TreeModel& model,
                                EnvelopeOptions options) {
    const auto base = generalized_snell(data, model, options);
    LowerData self = data;
    self.lower_rcll = base.envelope;
    return check_sandwich(data, self, model, options);
}

CheckReport check_classical_coincidence(const AdaptedProcess& barrier, const TreeModel& model,
                                        EnvelopeOptions options) {
    CheckReport report;
    const int n = model.steps();
    LowerData data;
    data.lower_rcll = barrier;
    data.lower_measurable = AdaptedProcess::constant(n, 0.0);
    data.measure = MonotoneMeasure::zero(n);
    data.terminal.assign(barrier.terminal().begin(), barrier.terminal().end());

    const auto result = generalized_snell(data, model, options);
    const AdaptedProcess classical = snell_envelope(barrier, model);
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= k; ++j)
            record_worst(report, std::abs(result.envelope.at(k, j) - classical.at(k, j)), k, j);
    report.passed = report.worst <= 1e-8;
    if (report.passed && n <= 4) {
        const double enumerated = brute_force_value(barrier, model);
        const double root_gap = std::abs(enumerated - result.envelope.at(0, 0));
        if (root_gap > 1e-12) {
            report.passed = false;
            report.detail = "exhaustive stopping value differs at the root";
            report.worst = std::max(report.worst, root_gap);
        }
    }
    if (!report.passed && report.detail.empty())
        report.detail = "classical envelope differs at " + node_text(report.step, report.node);
    return report;
}

CheckReport check_atom_split(const LowerData& data, const TreeModel& model,
                             EnvelopeOptions options, double tol) {
    CheckReport report;
    const int n = model.steps();
    const auto result = generalized_snell(data, model, options);
    const auto split = decompose_atoms(data.measure);

    for (int s = 1; s <= n; ++s) {
        const bool left_semantics = data.measure.is_atom_step(s) || s == n;
        for (int c = 0; c <= s; ++c) {
            if (!data.measure.charges(s, c)) continue;
            const double obstacle = data.lower_measurable.at(s, c);
            if (left_semantics) {
                // obstacle against the pre-reflection (left-limit) value at
                // every predecessor
                for (int parent = std::max(0, c - 1); parent <= std::min(c, s - 1); ++parent) {
                    const double pre = std::max(result.solution.pre_reflection.at(s - 1, parent),
                                                data.lower_rcll.at(s - 1, parent));
                    record_worst(report, obstacle - pre, s, c);
                }
            } else if (split.continuous_part.charges(s, c)) {
                record_worst(report, obstacle - result.envelope.at(s, c), s, c);
            }
        }
    }
    report.passed = report.worst <= tol;
    if (!report.passed)
        report.detail = "obstacle constraint fails at " + node_text(report.step, report.node);
    return report;
}

EnvelopeResult lebesgue_example(const AdaptedProcess& lower, const AdaptedProcess& obstacle,
                                const std::vector<double>& terminal, const TreeModel& model,
                                EnvelopeOptions options) {
    const int n = model.steps();
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= k; ++j)
            if (lower.at(k, j) > obstacle.at(k, j))
                throw std::invalid_argument("lebesgue_example: requires L <= l nodewise");
    LowerData data;
    data.lower_rcll = lower;
    data.lower_measurable = obstacle;
    data.measure = MonotoneMeasure::lebesgue(model);
    data.terminal = terminal;
    return generalized_snell(data, model, options);
}

}  // namespace gsnell
