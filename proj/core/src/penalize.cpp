#include "gsnell/penalize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gsnell/random_instances.hpp"

namespace gsnell {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Constraint profile at (k, j): everything a dominating process must sit
// above when the path stands at that node. The charged obstacles one step
// ahead are folded in so that upper bounds dominate in the left-limit sense.
AdaptedProcess constraint_profile(const LowerData& data, const TreeModel& model) {
    const int n = model.steps();
    AdaptedProcess h(n, kNegInf);
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= k; ++j) {
            double v = data.lower_measurable.at(k, j);
            if (k < n) v = std::max(v, data.lower_rcll.at(k, j));
            if (k == n) v = std::max(v, data.terminal[j]);
            if (k < n) {
                for (int c = j; c <= j + 1; ++c)
                    if (data.measure.charges(k + 1, c))
                        v = std::max(v, data.lower_measurable.at(k + 1, c));
            }
            h.at(k, j) = v;
        }
    }
    return h;
}

}  // namespace

Generator penalty_generator(double intensity, const AdaptedProcess& obstacle,
                            const AdaptedProcess& clamp_low) {
    if (!(intensity >= 0.0))
        throw std::invalid_argument("penalty_generator: intensity must be nonnegative");
    if (obstacle.steps() != clamp_low.steps())
        throw std::invalid_argument("penalty_generator: shape mismatch");
    Generator g;
    g.label = "penalty";
    g.form = Generator::Form::penalty;
    g.penalty_intensity = intensity;
    g.penalty_obstacle = obstacle;
    g.bound = AdaptedProcess::build(obstacle.steps(), [&](int k, int j) {
        return intensity * std::max(obstacle.at(k, j) - clamp_low.at(k, j), 0.0);
    });
    AdaptedProcess obs = obstacle;
    g.evaluate = [intensity, obs = std::move(obs)](int k, int j, double y) {
        return intensity * std::max(obs.at(k, j) - y, 0.0);
    };
    return g;
}

Generator penalty_generator(double intensity, const AdaptedProcess& obstacle) {
    double floor = 0.0;
    for (double v : obstacle.data()) floor = std::min(floor, v);
    return penalty_generator(intensity, obstacle,
                             AdaptedProcess::constant(obstacle.steps(), floor));
}

AdaptedProcess default_dominating_martingale(const LowerData& data, const TreeModel& model) {
    const int n = model.steps();
    const AdaptedProcess h = constraint_profile(data, model);

    // forward running maximum of the profile over all paths into each node
    AdaptedProcess fwd(n, kNegInf);
    fwd.at(0, 0) = h.at(0, 0);
    for (int k = 1; k <= n; ++k) {
        for (int j = 0; j <= k; ++j) {
            double best = kNegInf;
            if (j <= k - 1) best = std::max(best, fwd.at(k - 1, j));
            if (j >= 1) best = std::max(best, fwd.at(k - 1, j - 1));
            fwd.at(k, j) = std::max(h.at(k, j), best);
        }
    }

    // conditional expectation of the terminal running maximum, floored by
    // the profile so domination survives roundoff in the averages
    AdaptedProcess m(n);
    for (int j = 0; j <= n; ++j) m.at(n, j) = fwd.at(n, j);
    const double p = model.up_probability;
    for (int k = n - 1; k >= 0; --k)
        for (int j = 0; j <= k; ++j)
            m.at(k, j) =
                std::max(step_expectation(m.at(k + 1, j + 1), m.at(k + 1, j), p), h.at(k, j));
    return m;
}

AdaptedProcess dominating_running_max(const LowerData& data, const TreeModel& model) {
    const int n = model.steps();
    const AdaptedProcess h = constraint_profile(data, model);
    AdaptedProcess w(n);
    for (int j = 0; j <= n; ++j) w.at(n, j) = h.at(n, j);
    for (int k = n - 1; k >= 0; --k)
        for (int j = 0; j <= k; ++j)
            w.at(k, j) = std::max(h.at(k, j), std::max(w.at(k + 1, j + 1), w.at(k + 1, j)));
    return w;
}

MembershipReport check_dominating(const AdaptedProcess& v, const LowerData& data,
                                  const TreeModel& model, double supermartingale_tol) {
    MembershipReport report;
    const int n = model.steps();
    auto fail = [&](std::string reason, int k, int j) {
        report.ok = false;
        report.reason = std::move(reason);
        report.step = k;
        report.node = j;
    };
    if (v.steps() != n) {
        fail("shape mismatch", -1, -1);
        return report;
    }
    const auto super = is_supermartingale(v, model, supermartingale_tol);
    if (!super.ok) {
        fail("not a supermartingale (excess " + std::to_string(super.worst_excess) + ")",
             super.step, super.node);
        return report;
    }
    for (int k = 0; k < n; ++k)
        for (int j = 0; j <= k; ++j)
            if (data.lower_rcll.at(k, j) > v.at(k, j)) {
                fail("barrier not dominated", k, j);
                return report;
            }
    for (int j = 0; j <= n; ++j)
        if (data.terminal[j] > v.at(n, j)) {
            fail("terminal value not dominated", n, j);
            return report;
        }
    // charged obstacles must sit below the value one step earlier, along
    // every path into the charged node
    for (int s = 1; s <= n; ++s)
        for (int c = 0; c <= s; ++c) {
            if (!data.measure.charges(s, c)) continue;
            for (int parent = std::max(0, c - 1); parent <= std::min(c, s - 1); ++parent)
                if (data.lower_measurable.at(s, c) > v.at(s - 1, parent)) {
                    fail("charged obstacle above the left value", s, c);
                    return report;
                }
        }
    return report;
}

GrbsdeSolution solve_penalized(double n, const LowerData& data, const AdaptedProcess& v,
                               const TreeModel& model) {
    if (!(n >= 0.0)) throw std::invalid_argument("solve_penalized: penalty level must be >= 0");
    const auto membership = check_dominating(v, data, model);
    if (!membership.ok)
        throw std::invalid_argument("solve_penalized: dominating process rejected: " +
                                    membership.reason);

    GrbsdeProblem problem;
    problem.terminal = data.terminal;
    problem.generator = penalty_generator(n, data.lower_measurable, data.lower_rcll);
    problem.measure = data.measure;
    problem.lower = data.lower_rcll;
    problem.upper = v;
    GrbsdeSolution solution = solve_two_barrier(problem, model);

    double k_minus_mass = 0.0;
    for (int k = 0; k < model.steps(); ++k)
        for (int j = 0; j <= k; ++j)
            k_minus_mass = std::max(k_minus_mass, solution.k_minus.increment(k, j));
    if (k_minus_mass > 5e-11)
        throw std::logic_error(
            "solve_penalized: downward reflection fired; the dominating-process check is broken");
    return solution;
}

double terminal_atom_fixpoint(double xi, double terminal_obstacle, double atom_mass, double n,
                              double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("terminal_atom_fixpoint: lo > hi");
    if (!(atom_mass >= 0.0))
        throw std::invalid_argument("terminal_atom_fixpoint: mass must be nonnegative");
    double root;
    if (xi >= terminal_obstacle) {
        root = xi;
    } else {
        const double nm = n * atom_mass;
        root = (xi + nm * terminal_obstacle) / (1.0 + nm);
    }
    return std::max(lo, std::min(root, hi));
}

RbsdeSolution iterate_to_limit(const LowerData& data, const TreeModel& model,
                               PenaltySchedule schedule, double tol, bool force_full_schedule) {
    if (!(schedule.first > 0.0) || !(schedule.growth > 1.0) || schedule.last < schedule.first)
        throw std::invalid_argument("iterate_to_limit: bad schedule");
    const AdaptedProcess v = default_dominating_martingale(data, model);

    RbsdeSolution out;
    auto& diag = out.diagnostics;

    auto k_plus_mass = [&](const GrbsdeSolution& s) { return s.k_plus.weighted_total(model); };
    auto sandwich_excess = [&](const GrbsdeSolution& s) {
        double worst = 0.0;
        for (int k = 0; k < model.steps(); ++k)
            for (int j = 0; j <= k; ++j)
                worst = std::max({worst, data.lower_rcll.at(k, j) - s.y.at(k, j),
                                  s.y.at(k, j) - v.at(k, j)});
        return worst;
    };
    auto obstacle_deficit = [&](const GrbsdeSolution& s) {
        double worst = 0.0;
        for (int step = 1; step <= model.steps(); ++step)
            for (int c = 0; c <= step; ++c) {
                if (!data.measure.charges(step, c)) continue;
                const double obstacle = data.lower_measurable.at(step, c);
                for (int parent = std::max(0, c - 1); parent <= std::min(c, step - 1); ++parent)
                    worst = std::max(
                        worst, obstacle - std::max(s.pre_reflection.at(step - 1, parent),
                                                   data.lower_rcll.at(step - 1, parent)));
            }
        return std::max(worst, 0.0);
    };

    GrbsdeSolution prev = solve_penalized(0.0, data, v, model);
    diag.trace.push_back({0.0, prev.y.at(0, 0), 0.0, k_plus_mass(prev)});
    diag.sandwich_violation = sandwich_excess(prev);
    diag.solves = 1;

    GrbsdeSolution last = prev;
    double n = schedule.first;
    while (true) {
        GrbsdeSolution cur = solve_penalized(n, data, v, model);
        ++diag.solves;
        double gap = 0.0;
        double mono = 0.0;
        for (std::size_t i = 0; i < cur.y.data().size(); ++i) {
            const double d = cur.y.data()[i] - prev.y.data()[i];
            gap = std::max(gap, std::abs(d));
            mono = std::max(mono, -d);
        }
        diag.monotonicity_violation = std::max(diag.monotonicity_violation, mono);
        diag.sandwich_violation = std::max(diag.sandwich_violation, sandwich_excess(cur));
        diag.trace.push_back({n, cur.y.at(0, 0), gap, k_plus_mass(cur)});
        diag.final_n = n;
        diag.sup_gap = gap;
        diag.constraint_gap = obstacle_deficit(cur);
        prev = std::move(cur);
        last = prev;
        if (diag.monotonicity_violation > 1e-10)
            throw std::logic_error("iterate_to_limit: monotone chain violated");
        const bool settled = gap < tol && diag.constraint_gap <= tol;
        if (!force_full_schedule && settled) {
            diag.converged = true;
            break;
        }
        if (n >= schedule.last) {
            diag.converged = settled;
            break;
        }
        n = std::min(n * schedule.growth, schedule.last);
    }

    out.y = std::move(last.y);
    out.z = std::move(last.z);
    out.k_plus = std::move(last.k_plus);
    out.pre_reflection = std::move(last.pre_reflection);
    out.drift = std::move(last.drift);
    return out;
}

AdaptedProcess effective_barrier_solve(const LowerData& data, const TreeModel& model) {
    const int n = model.steps();
    const double p = model.up_probability;
    AdaptedProcess s(n);
    for (int j = 0; j <= n; ++j) s.at(n, j) = data.terminal[j];
    for (int k = n - 1; k >= 0; --k) {
        for (int j = 0; j <= k; ++j) {
            double floor = data.lower_rcll.at(k, j);
            for (int c = j; c <= j + 1; ++c)
                if (data.measure.charges(k + 1, c))
                    floor = std::max(floor, data.lower_measurable.at(k + 1, c));
            s.at(k, j) = std::max(floor, step_expectation(s.at(k + 1, j + 1), s.at(k + 1, j), p));
        }
    }
    return s;
}

MinimalityReport check_minimality(const RbsdeSolution& solution, const LowerData& data,
                                  const TreeModel& model, int trials, std::uint64_t seed) {
    MinimalityReport report;
    report.seed = seed;
    report.k_plus_mass = solution.k_plus.weighted_total(model);
    const int n = model.steps();
    InstanceRng rng(seed);

    auto residual = [&](const AdaptedProcess& barrier) {
        double total = 0.0;
        for (int k = 0; k < n; ++k) {
            const auto probs = model.level_probabilities(k);
            for (int j = 0; j <= k; ++j)
                total += probs[j] * (solution.y.at(k, j) - barrier.at(k, j)) *
                         solution.k_plus.increment(k, j);
        }
        return total;
    };

    // canonical effective barrier: the binding constraint, capped by y
    AdaptedProcess canonical(n);
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= k; ++j) {
            double b = data.lower_rcll.at(k, j);
            if (data.measure.charges(k, j))
                b = std::max(b, data.lower_measurable.at(k, j));
            canonical.at(k, j) = std::min(b, solution.y.at(k, j));
        }
    report.worst_residual = residual(canonical);
    report.barriers_tested = 1;

    for (int t = 0; t < trials; ++t) {
        AdaptedProcess corridor(n);
        for (int k = 0; k <= n; ++k)
            for (int j = 0; j <= k; ++j) {
                const double lo = data.lower_rcll.at(k, j);
                const double hi = solution.y.at(k, j);
                double b = lo + rng.uniform(0.0, 1.0) * std::max(hi - lo, 0.0);
                // raise toward charged obstacles one step ahead, capped by y
                if (k < n)
                    for (int c = j; c <= j + 1; ++c)
                        if (data.measure.charges(k + 1, c))
                            b = std::max(b, data.lower_measurable.at(k + 1, c));
                corridor.at(k, j) = std::min(b, hi);
            }
        report.worst_residual = std::max(report.worst_residual, residual(corridor));
        ++report.barriers_tested;
    }
    return report;
}

SmallestReport check_smallest_in_class(const RbsdeSolution& solution, const LowerData& data,
                                       const TreeModel& model, int trials, std::uint64_t seed) {
    SmallestReport report;
    report.seed = seed;
    const int n = model.steps();
    InstanceRng rng(seed);

    for (int t = 0; t < trials; ++t) {
        LowerData bumped = data;
        bumped.lower_rcll = AdaptedProcess::build(n, [&](int k, int j) {
            return data.lower_rcll.at(k, j) + rng.uniform(0.0, 0.8);
        });
        bumped.lower_measurable = AdaptedProcess::build(n, [&](int k, int j) {
            return data.lower_measurable.at(k, j) + rng.uniform(0.0, 0.8);
        });
        for (int j = 0; j <= n; ++j) bumped.terminal[j] += rng.uniform(0.0, 0.8);

        AdaptedProcess candidate = (t % 2 == 0) ? default_dominating_martingale(bumped, model)
                                                : dominating_running_max(bumped, model);
        if (t % 3 == 2) {
            // add a deterministic nonincreasing drift; stays a supermartingale
            const double a = rng.uniform(0.05, 0.3);
            for (int k = 0; k <= n; ++k)
                for (int j = 0; j <= k; ++j) candidate.at(k, j) += a * (n - k);
        }
        if (!check_dominating(candidate, data, model).ok) continue;

        ++report.samples;
        for (int k = 0; k <= n; ++k)
            for (int j = 0; j <= k; ++j) {
                const double violation = solution.y.at(k, j) - candidate.at(k, j);
                if (violation > report.worst_violation) {
                    report.worst_violation = violation;
                    if (violation > 1e-12) {
                        report.counterexample_sample = t;
                        report.counterexample_step = k;
                        report.counterexample_node = j;
                    }
                }
                if (violation > 1e-12) ++report.violations;
            }
    }
    return report;
}

}  // namespace gsnell
