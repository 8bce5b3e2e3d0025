#include "gsnell/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gsnell/envelope.hpp"
#include "gsnell/grbsde.hpp"
#include "gsnell/penalize.hpp"
#include "gsnell/random_instances.hpp"
#include "gsnell/snell.hpp"

namespace gsnell {

namespace {

void record_failure(SuiteReport& report, const std::string& what, double worst) {
    ++report.failures;
    report.worst = std::max(report.worst, worst);
    if (report.failure_details.size() < 16) report.failure_details.push_back(what);
}

std::string describe(const CheckReport& check, const std::string& name, int instance) {
    std::ostringstream os;
    os << name << " instance " << instance << ": " << check.detail << " (worst " << check.worst
       << ")";
    return os.str();
}

}  // namespace

SuiteReport run_coincidence_suite(std::uint64_t seed, int depth, int instances,
                                  int brute_instances, double tol, double brute_tol) {
    SuiteReport report;
    report.name = "coincidence";
    report.seed = seed;
    InstanceRng rng(seed);

    for (int i = 0; i < instances; ++i) {
        ++report.instances;
        const TreeModel model(TimeGrid(depth, 1.0));
        const AdaptedProcess barrier = random_process(rng, depth, -1.0, 1.0);
        const auto check = check_classical_coincidence(barrier, model);
        report.worst = std::max(report.worst, check.worst);
        if (!check.passed) record_failure(report, describe(check, "coincidence", i), check.worst);
        else if (check.worst > tol)
            record_failure(report, describe(check, "coincidence tolerance", i), check.worst);
    }

    for (int i = 0; i < brute_instances; ++i) {
        ++report.instances;
        const TreeModel model = random_tree(rng, 1, 4);
        const AdaptedProcess barrier = random_process(rng, model.steps(), -1.0, 1.0);
        const double enumerated = brute_force_value(barrier, model);
        const double induction = snell_envelope(barrier, model).at(0, 0);
        const double gap = std::abs(enumerated - induction);
        report.worst = std::max(report.worst, gap);
        if (gap > brute_tol) {
            std::ostringstream os;
            os << "enumeration gap " << gap << " on brute instance " << i;
            record_failure(report, os.str(), gap);
        }
    }
    return report;
}

SuiteReport run_corollary_suite(std::uint64_t seed, int depth, int instances, double tol) {
    SuiteReport report;
    report.name = "corollary";
    report.seed = seed;
    InstanceRng rng(seed);

    for (int i = 0; i < instances; ++i) {
        const TreeModel model = random_tree(rng, 3, depth);
        const int n = model.steps();
        const LowerData data = random_lower_data(rng, model);

        // (1) obstacle-vs-left-barrier substitution
        ++report.instances;
        auto subst = check_bar_substitution(data, model);
        if (!subst.passed || subst.worst > tol)
            record_failure(report, describe(subst, "bar substitution", i), subst.worst);
        report.worst = std::max(report.worst, subst.worst);

        // (2) monotone in the data, with a mass-thinned measure
        ++report.instances;
        LowerData smaller = data;
        smaller.lower_rcll = AdaptedProcess::build(n, [&](int k, int j) {
            return data.lower_rcll.at(k, j) - (rng.chance(0.5) ? rng.uniform(0.0, 0.6) : 0.0);
        });
        smaller.lower_measurable = AdaptedProcess::build(n, [&](int k, int j) {
            return data.lower_measurable.at(k, j) - rng.uniform(0.0, 0.6);
        });
        for (double& v : smaller.terminal) v -= rng.uniform(0.0, 0.5);
        smaller.measure = MonotoneMeasure::zero(n);
        for (int s = 1; s <= n; ++s)
            for (int c = 0; c <= s; ++c) {
                const double mass = data.measure.increment(s, c);
                if (mass > 0.0 && rng.chance(0.7))
                    smaller.measure.set_increment(s, c, mass * rng.uniform(0.3, 1.0));
            }
        auto mono = check_monotone(data, smaller, model);
        if (!mono.passed || mono.worst > tol)
            record_failure(report, describe(mono, "monotone", i), mono.worst);
        report.worst = std::max(report.worst, mono.worst);

        // (3) domination, plus the equality case with obstacles under the
        // left barrier values
        ++report.instances;
        auto dom = check_domination(data, model);
        if (!dom.passed || dom.worst > tol)
            record_failure(report, describe(dom, "domination", i), dom.worst);
        report.worst = std::max(report.worst, dom.worst);

        ++report.instances;
        LowerData low_obstacle = data;
        low_obstacle.lower_measurable = AdaptedProcess::build(n, [&](int k, int j) {
            return left_min(data.lower_rcll, k, j) - rng.uniform(0.0, 0.5);
        });
        auto dom_eq = check_domination(low_obstacle, model);
        if (!dom_eq.passed || dom_eq.worst > tol)
            record_failure(report, describe(dom_eq, "domination equality", i), dom_eq.worst);
        report.worst = std::max(report.worst, dom_eq.worst);

        // (4) sandwich: corridor data between the constraints and the envelope
        ++report.instances;
        CheckReport sand;
        if (i % 5 == 4) {
            sand = check_sandwich_self(data, model);
        } else {
            const auto base = generalized_snell(data, model);
            const AdaptedProcess& y = base.envelope;
            LowerData corridor = data;
            corridor.lower_rcll = AdaptedProcess::build(n, [&](int k, int j) {
                if (k == n) return data.lower_rcll.at(k, j);
                const double lo = data.lower_rcll.at(k, j);
                return lo + rng.uniform(0.0, 0.9) * std::max(y.at(k, j) - lo, 0.0);
            });
            corridor.lower_measurable = AdaptedProcess::build(n, [&](int k, int j) {
                const double l0 = data.lower_measurable.at(k, j);
                const double room = left_min(y, k, j) - l0;
                if (room <= 0.0) return l0;
                return l0 + rng.uniform(0.0, 0.9) * room;
            });
            sand = check_sandwich(data, corridor, model);
        }
        if (!sand.passed || sand.worst > tol)
            record_failure(report, describe(sand, "sandwich", i), sand.worst);
        report.worst = std::max(report.worst, sand.worst);
    }
    return report;
}

SuiteReport run_comparison_suite(std::uint64_t seed, int depth, int pairs, double tol) {
    SuiteReport report;
    report.name = "comparison";
    report.seed = seed;
    InstanceRng rng(seed);

    int built = 0;
    int attempts = 0;
    while (built < pairs && attempts < pairs * 40) {
        ++attempts;
        const TreeModel model = random_tree(rng, 3, depth);
        const int n = model.steps();
        const bool coupled = built % 10 < 7;  // primed barriers equal to the base ones

        GrbsdeProblem problem;
        problem.lower = random_process(rng, n, -1.0, 0.3);
        problem.upper = random_supermartingale(rng, model, 0.5, 1.4, 0.2);
        problem.terminal.resize(n + 1);
        for (int j = 0; j <= n; ++j) problem.terminal[j] = rng.uniform(-1.0, 0.5);
        problem.measure = random_measure(rng, n, {0.6, 0.85, 0.5, 1.5, 0.35});
        const AdaptedProcess obstacle = random_process(rng, n, -0.5, 1.8);
        const double intensity = rng.uniform(0.5, 4.0);

        double floor = 0.0;
        for (double v : problem.lower.data()) floor = std::min(floor, v);
        for (double v : problem.terminal) floor = std::min(floor, v);
        floor -= 1.0;
        problem.generator =
            penalty_generator(intensity, obstacle, AdaptedProcess::constant(n, floor));

        std::vector<double> primed_terminal = problem.terminal;
        for (double& v : primed_terminal) v += rng.uniform(0.0, 0.7);
        AdaptedProcess primed_lower = problem.lower;
        AdaptedProcess primed_upper = problem.upper;
        if (!coupled) {
            primed_lower = AdaptedProcess::build(n, [&](int k, int j) {
                return problem.lower.at(k, j) -
                       (rng.chance(0.5) ? rng.uniform(0.0, 0.4) : 0.0);
            });
            primed_upper = AdaptedProcess::build(n, [&](int k, int j) {
                return problem.upper.at(k, j) +
                       (rng.chance(0.5) ? rng.uniform(0.0, 0.4) : 0.0);
            });
        }

        // primed drive dominating the driver uniformly: dA' >= bound * ddelta
        MonotoneMeasure drive(n);
        for (int s = 1; s <= n; ++s)
            for (int c = 0; c <= s; ++c) {
                const double mass = problem.measure.increment(s, c);
                if (mass > 0.0)
                    drive.set_increment(
                        s, c,
                        problem.generator.bound.at(s, c) * mass * (1.0 + rng.uniform(0.0, 0.3)));
            }

        const auto primed =
            solve_measure_driven(primed_terminal, drive, primed_lower, primed_upper, model);
        const auto solution = solve_two_barrier(problem, model);
        const auto comparison = compare_minimal(problem, solution, primed, model, tol);
        if (!comparison.hypotheses_ok) continue;  // uncoupled draw strayed; redraw

        ++built;
        ++report.instances;
        const double worst =
            std::max({comparison.worst_value_violation, comparison.worst_k_plus_violation,
                      comparison.worst_k_minus_violation});
        report.worst = std::max(report.worst, worst);
        if (!comparison.ok()) {
            std::ostringstream os;
            os << "comparison pair " << built << " violated at ("
               << comparison.counterexample_step << ", " << comparison.counterexample_node
               << "), worst " << worst;
            record_failure(report, os.str(), worst);
        }
    }
    if (built < pairs)
        record_failure(report, "could not build the requested number of hypothesis-satisfying pairs",
                       0.0);
    return report;
}

SuiteReport run_atom_split_suite(std::uint64_t seed, int depth, int instances) {
    SuiteReport report;
    report.name = "atom-split";
    report.seed = seed;
    InstanceRng rng(seed);

    for (int i = 0; i < instances; ++i) {
        ++report.instances;
        const TreeModel model = random_tree(rng, 4, depth);
        const int n = model.steps();
        LowerData data = random_lower_data(rng, model);
        if (rng.chance(0.6)) data.measure.add_atom(n, rng.uniform(0.5, 1.5));
        if (rng.chance(0.8)) data.measure.add_atom(rng.pick(1, n - 1), rng.uniform(0.5, 1.5));
        // at unflagged charged nodes keep the obstacle under the barrier, so
        // the post-value form of the constraint is attainable
        for (int s = 1; s < n; ++s) {
            if (data.measure.is_atom_step(s)) continue;
            for (int c = 0; c <= s; ++c)
                if (data.measure.charges(s, c))
                    data.lower_measurable.at(s, c) =
                        std::min(data.lower_measurable.at(s, c), data.lower_rcll.at(s, c));
        }
        auto check = check_atom_split(data, model);
        report.worst = std::max(report.worst, check.worst);
        if (!check.passed) record_failure(report, describe(check, "atom split", i), check.worst);
    }
    return report;
}

}  // namespace gsnell
