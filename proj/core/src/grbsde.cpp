#include "gsnell/grbsde.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace gsnell {

namespace {

struct PenaltyTerm {
    double kink = 0.0;    // obstacle value; the term is weight * (kink - y)^+
    double weight = 0.0;  // >= 0
};

// Unique root of y = e + sum_i w_i (kink_i - y)^+ by descending-kink segment
// scan. The root is clipped into [e, max(e, kink_max)], which contains it in
// exact arithmetic; the clip removes roundoff overshoot so that downstream
// comparisons against dominating barriers stay exact.
double penalty_fixed_point(double e, std::array<PenaltyTerm, 2>& terms, int count) {
    if (count == 0) return e;
    if (count == 2 && terms[0].kink < terms[1].kink) std::swap(terms[0], terms[1]);
    const double kink_max = terms[0].kink;
    if (e >= kink_max) return e;

    double weight_sum = 0.0;
    double weighted_kinks = 0.0;
    double root = e;
    for (int m = 0; m < count; ++m) {
        weight_sum += terms[m].weight;
        weighted_kinks += terms[m].weight * terms[m].kink;
        const double candidate = (e + weighted_kinks) / (1.0 + weight_sum);
        const double lower = (m + 1 < count) ? terms[m + 1].kink : -HUGE_VAL;
        if (candidate >= lower && candidate <= terms[m].kink) {
            root = candidate;
            break;
        }
        root = candidate;  // last segment wins if none matched (roundoff ties)
    }
    return std::min(std::max(root, e), std::max(e, kink_max));
}

// Bracketed bisection for y = e + G(y), |G| <= bound_hint.
double bisect_fixed_point(double e, const std::function<double(double)>& drive,
                          double bound_hint) {
    double lo = e - bound_hint - 1.0;
    double hi = e + bound_hint + 1.0;
    auto f = [&](double y) { return e + drive(y) - y; };
    double flo = f(lo);
    double fhi = f(hi);
    int expansions = 0;
    while ((flo < 0.0 || fhi > 0.0) && expansions < 50) {
        const double width = hi - lo;
        if (flo < 0.0) lo -= width;
        if (fhi > 0.0) hi += width;
        flo = f(lo);
        fhi = f(hi);
        ++expansions;
    }
    if (flo < 0.0 || fhi > 0.0)
        throw std::runtime_error("implicit step: no sign change after bracket expansion");
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct StepOutcome {
    double pre = 0.0;
    double y = 0.0;
    double dk_plus = 0.0;
    double dk_minus = 0.0;
};

StepOutcome clamp_with_residuals(double pre, double lo, double hi) {
    StepOutcome out;
    out.pre = pre;
    out.y = std::max(lo, std::min(pre, hi));
    out.dk_plus = std::max(lo - std::min(pre, hi), 0.0);
    out.dk_minus = std::max(std::max(pre, lo) - hi, 0.0);
    return out;
}

}  // namespace

void GrbsdeProblem::validate(const TreeModel& model) const {
    const int n = model.steps();
    if (lower.steps() != n || upper.steps() != n || measure.steps() != n ||
        static_cast<int>(terminal.size()) != n + 1)
        throw std::invalid_argument("GrbsdeProblem: component shapes disagree");
    if (generator.bound.steps() != n)
        throw std::invalid_argument("GrbsdeProblem: driver bound shape disagrees");
    if (generator.form == Generator::Form::penalty && generator.penalty_obstacle.steps() != n)
        throw std::invalid_argument("GrbsdeProblem: penalty obstacle shape disagrees");
    for (int k = 0; k < n; ++k)
        for (int j = 0; j <= k; ++j)
            if (lower.at(k, j) > upper.at(k, j))
                throw std::invalid_argument("GrbsdeProblem: lower barrier above upper barrier");
}

GrbsdeSolution solve_two_barrier(const GrbsdeProblem& problem, const TreeModel& model) {
    problem.validate(model);
    if (model.up_probability != 0.5)
        throw std::invalid_argument("solve_two_barrier: requires the symmetric walk");
    const int n = model.steps();
    const double p = model.up_probability;
    const double rep_scale = 2.0 * model.sqrt_dt();
    const Generator& gen = problem.generator;

    GrbsdeSolution sol;
    sol.y = AdaptedProcess(n);
    sol.pre_reflection = AdaptedProcess(n);
    sol.z = PredictableVolatility(n);
    sol.drift = PredictableVolatility(n);
    sol.k_plus = MonotoneMeasure(n);
    sol.k_minus = MonotoneMeasure(n);

    for (int j = 0; j <= n; ++j) {
        sol.y.at(n, j) = problem.terminal[j];
        sol.pre_reflection.at(n, j) = problem.terminal[j];
    }

    for (int k = n - 1; k >= 0; --k) {
        for (int j = 0; j <= k; ++j) {
            const double up = sol.y.at(k + 1, j + 1);
            const double dn = sol.y.at(k + 1, j);
            const double e = step_expectation(up, dn, p);
            const double w_up = p * problem.measure.increment(k + 1, j + 1);
            const double w_dn = (1.0 - p) * problem.measure.increment(k + 1, j);

            double pre = e;
            switch (gen.form) {
                case Generator::Form::zero:
                    break;
                case Generator::Form::unit_drive:
                    pre = e + (w_up + w_dn);
                    break;
                case Generator::Form::penalty: {
                    std::array<PenaltyTerm, 2> terms{};
                    int count = 0;
                    if (w_up > 0.0)
                        terms[count++] = {gen.penalty_obstacle.at(k + 1, j + 1),
                                          w_up * gen.penalty_intensity};
                    if (w_dn > 0.0)
                        terms[count++] = {gen.penalty_obstacle.at(k + 1, j),
                                          w_dn * gen.penalty_intensity};
                    pre = penalty_fixed_point(e, terms, count);
                    break;
                }
                case Generator::Form::custom: {
                    if (w_up > 0.0 || w_dn > 0.0) {
                        const double hint =
                            w_up * gen.bound.at(k + 1, j + 1) + w_dn * gen.bound.at(k + 1, j);
                        auto drive = [&](double y) {
                            double total = 0.0;
                            if (w_up > 0.0) total += w_up * gen.evaluate(k + 1, j + 1, y);
                            if (w_dn > 0.0) total += w_dn * gen.evaluate(k + 1, j, y);
                            return total;
                        };
                        pre = bisect_fixed_point(e, drive, hint);
                    }
                    break;
                }
            }

            const auto step = clamp_with_residuals(pre, problem.lower.at(k, j),
                                                   problem.upper.at(k, j));
            sol.y.at(k, j) = step.y;
            sol.pre_reflection.at(k, j) = step.pre;
            sol.drift.at(k, j) = step.pre - e;
            sol.k_plus.set_increment(k, j, step.dk_plus);
            sol.k_minus.set_increment(k, j, step.dk_minus);
            sol.z.at(k, j) = (up - dn) / rep_scale;
        }
    }
    return sol;
}

ImplicitStepResult implicit_step(double e, const Generator& gen, int step, int node,
                                 double ddelta, double lo, double hi) {
    if (!(ddelta >= 0.0)) throw std::invalid_argument("implicit_step: ddelta must be >= 0");
    if (lo > hi) throw std::invalid_argument("implicit_step: lo > hi");

    double pre = e;
    if (ddelta > 0.0) {
        switch (gen.form) {
            case Generator::Form::zero:
                break;
            case Generator::Form::unit_drive:
                pre = e + ddelta;
                break;
            case Generator::Form::penalty: {
                std::array<PenaltyTerm, 2> terms{};
                terms[0] = {gen.penalty_obstacle.at(step, node), ddelta * gen.penalty_intensity};
                pre = penalty_fixed_point(e, terms, 1);
                break;
            }
            case Generator::Form::custom: {
                auto drive = [&](double y) { return ddelta * gen.evaluate(step, node, y); };
                pre = bisect_fixed_point(e, drive, ddelta * gen.bound.at(step, node));
                break;
            }
        }
    }
    const auto out = clamp_with_residuals(pre, lo, hi);
    return {out.y, out.dk_plus, out.dk_minus, out.pre};
}

HReport validate_H(const GrbsdeProblem& problem, const TreeModel& model, int y_samples) {
    HReport report;
    const int n = model.steps();
    const Generator& gen = problem.generator;
    const int refine = 16;
    double h_coarse = 0.0;
    double h_fine = 0.0;

    auto grid_modulus = [&](int k, int j, double lo, double hi, int points, double& width) {
        double worst = 0.0;
        width = (hi - lo) / (points - 1);
        double prev = gen.evaluate(k, j, lo);
        for (int s = 1; s < points; ++s) {
            const double cur = gen.evaluate(k, j, lo + width * s);
            worst = std::max(worst, std::abs(cur - prev));
            prev = cur;
        }
        return worst;
    };

    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= k; ++j) {
            // clamp range for the argument at this node
            const int bk = std::min(k, n - 1);
            const double lo = problem.lower.at(bk, std::min(j, bk));
            const double hi = problem.upper.at(bk, std::min(j, bk));
            const int points = std::max(y_samples, 3);
            for (int s = 0; s < points; ++s) {
                const double y = lo + (hi - lo) * double(s) / (points - 1);
                report.max_bound_violation =
                    std::max(report.max_bound_violation,
                             std::abs(gen.evaluate(k, j, y)) - gen.bound.at(k, j));
            }
            if (hi > lo) {
                const double coarse = grid_modulus(k, j, lo, hi, points, h_coarse);
                const double fine =
                    grid_modulus(k, j, lo, hi, refine * (points - 1) + 1, h_fine);
                report.continuity_coarse = std::max(report.continuity_coarse, coarse);
                report.continuity_fine = std::max(report.continuity_fine, fine);
                // a Lipschitz driver's adjacent-difference modulus shrinks
                // with the grid width; a jump keeps the fine modulus at the
                // coarse level
                if (fine > (coarse / h_coarse) * h_fine * 1.05 + 1e-9)
                    report.continuity_suspect = true;
            }
        }
    }
    report.upper_barrier = is_supermartingale(problem.upper, model, 1e-10);
    return report;
}

SkorokhodResiduals check_skorokhod(const GrbsdeSolution& solution, const GrbsdeProblem& problem,
                                   const TreeModel& model) {
    SkorokhodResiduals res;
    for (int k = 0; k < model.steps(); ++k) {
        const auto probs = model.level_probabilities(k);
        for (int j = 0; j <= k; ++j) {
            res.lower_residual += probs[j] * (solution.y.at(k, j) - problem.lower.at(k, j)) *
                                  solution.k_plus.increment(k, j);
            res.upper_residual += probs[j] * (problem.upper.at(k, j) - solution.y.at(k, j)) *
                                  solution.k_minus.increment(k, j);
        }
    }
    return res;
}

ComparisonInstance solve_measure_driven(std::vector<double> terminal, MonotoneMeasure drive,
                                        AdaptedProcess lower, AdaptedProcess upper,
                                        const TreeModel& model) {
    GrbsdeProblem problem;
    problem.terminal = std::move(terminal);
    problem.generator = Generator::unit_drive(model.steps());
    problem.measure = std::move(drive);
    problem.lower = std::move(lower);
    problem.upper = std::move(upper);

    ComparisonInstance instance;
    instance.solution = solve_two_barrier(problem, model);
    instance.terminal = std::move(problem.terminal);
    instance.drive = std::move(problem.measure);
    instance.lower = std::move(problem.lower);
    instance.upper = std::move(problem.upper);
    return instance;
}

ComparisonReport compare_minimal(const GrbsdeProblem& problem, const GrbsdeSolution& solution,
                                 const ComparisonInstance& primed, const TreeModel& model,
                                 double tol) {
    ComparisonReport report;
    const int n = model.steps();

    auto fail_hypothesis = [&](const std::string& name, int k, int j) {
        report.hypotheses_ok = false;
        report.failing_hypothesis = name;
        report.counterexample_step = k;
        report.counterexample_node = j;
    };

    for (int j = 0; j <= n && report.hypotheses_ok; ++j)
        if (problem.terminal[j] > primed.terminal[j])
            fail_hypothesis("terminal order: xi <= xi'", n, j);

    for (int k = 0; k < n && report.hypotheses_ok; ++k) {
        for (int j = 0; j <= k && report.hypotheses_ok; ++j) {
            if (primed.solution.y.at(k, j) > problem.upper.at(k, j))
                fail_hypothesis("barrier coupling: y' <= U", k, j);
            else if (primed.lower.at(k, j) > solution.y.at(k, j))
                fail_hypothesis("barrier coupling: L' <= y", k, j);
            else if (problem.lower.at(k, j) > primed.solution.y.at(k, j))
                fail_hypothesis("barrier coupling: L <= y'", k, j);
        }
    }

    // driver domination g(., y'_left) ddelta <= dA' at every charged child,
    // for every predecessor of the child
    for (int k = 0; k < n && report.hypotheses_ok; ++k) {
        for (int j = 0; j <= k && report.hypotheses_ok; ++j) {
            const double y_left = primed.solution.y.at(k, j);
            for (int c = j; c <= j + 1 && report.hypotheses_ok; ++c) {
                const double mass = problem.measure.increment(k + 1, c);
                if (mass <= 0.0) continue;
                const double lhs = problem.generator.evaluate(k + 1, c, y_left) * mass;
                if (lhs > primed.drive.increment(k + 1, c) + 1e-12)
                    fail_hypothesis("driver domination: g(y') ddelta <= dA'", k + 1, c);
            }
        }
    }
    if (!report.hypotheses_ok) return report;

    auto record = [&](double violation, bool& flag, double& worst, int k, int j) {
        if (violation > tol) {
            flag = false;
            if (violation > worst) {
                report.counterexample_step = k;
                report.counterexample_node = j;
            }
        }
        worst = std::max(worst, violation);
    };

    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= k; ++j)
            record(solution.y.at(k, j) - primed.solution.y.at(k, j), report.value_ok,
                   report.worst_value_violation, k, j);

    for (int k = 0; k < n; ++k) {
        for (int j = 0; j <= k; ++j) {
            if (primed.lower.at(k, j) == problem.lower.at(k, j))
                record(primed.solution.k_plus.increment(k, j) - solution.k_plus.increment(k, j),
                       report.k_plus_ok, report.worst_k_plus_violation, k, j);
            if (primed.upper.at(k, j) == problem.upper.at(k, j))
                record(solution.k_minus.increment(k, j) - primed.solution.k_minus.increment(k, j),
                       report.k_minus_ok, report.worst_k_minus_violation, k, j);
        }
    }
    return report;
}

}  // namespace gsnell
