#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gsnell/envelope.hpp"
#include "gsnell/harness.hpp"
#include "gsnell/random_instances.hpp"
#include "gsnell/snell.hpp"

using namespace gsnell;

namespace {

LowerData zero_measure_data(const AdaptedProcess& barrier) {
    LowerData d;
    d.lower_rcll = barrier;
    d.lower_measurable = AdaptedProcess::constant(barrier.steps(), 0.0);
    d.measure = MonotoneMeasure::zero(barrier.steps());
    d.terminal.assign(barrier.terminal().begin(), barrier.terminal().end());
    return d;
}

}  // namespace

TEST_CASE("left values on the recombining lattice") {
    const AdaptedProcess x = AdaptedProcess::build(3, [](int k, int j) { return 10.0 * k + j; });
    CHECK(left_min(x, 0, 0) == doctest::Approx(x.at(0, 0)));
    CHECK(left_min(x, 2, 0) == doctest::Approx(x.at(1, 0)));   // single parent
    CHECK(left_min(x, 2, 2) == doctest::Approx(x.at(1, 1)));   // single parent
    CHECK(left_min(x, 2, 1) == doctest::Approx(x.at(1, 0)));   // two parents, minimum
}

TEST_CASE("constant data gives a constant envelope with all certificates") {
    const TreeModel model(TimeGrid(4, 1.0));
    LowerData d;
    d.lower_rcll = AdaptedProcess::constant(4, 2.0);
    d.lower_measurable = AdaptedProcess::constant(4, 2.0);
    d.measure = MonotoneMeasure::lebesgue(model);
    d.terminal.assign(5, 2.0);
    const auto result = generalized_snell(d, model);
    CHECK(sup_distance(result.envelope, AdaptedProcess::constant(4, 2.0)) == 0.0);
    CHECK(result.certificates.all_ok());
}

TEST_CASE("zero measure reduces to the classical envelope, whatever the obstacle") {
    InstanceRng rng(501);
    for (int trial = 0; trial < 20; ++trial) {
        const TreeModel model = random_tree(rng, 2, 8);
        const AdaptedProcess barrier = random_process(rng, model.steps(), -1.0, 1.0);
        LowerData d = zero_measure_data(barrier);
        d.lower_measurable = random_process(rng, model.steps(), -5.0, 5.0);  // never charged
        const auto result = generalized_snell(d, model);
        CHECK(sup_distance(result.envelope, snell_envelope(barrier, model)) <= 1e-12);
        CHECK(result.certificates.all_ok());
    }
}

TEST_CASE("depth-2 classical example through the envelope API") {
    const TreeModel model(TimeGrid(2, 2.0));
    AdaptedProcess l(2, 0.0);
    l.at(1, 0) = 1.0;
    l.at(2, 1) = 2.0;
    const auto result = generalized_snell(zero_measure_data(l), model);
    CHECK(result.envelope.at(0, 0) == doctest::Approx(1.0));
    const auto check = check_classical_coincidence(l, model);
    CHECK(check.passed);
}

TEST_CASE("classical coincidence on random trees") {
    InstanceRng rng(502);
    for (int trial = 0; trial < 25; ++trial) {
        const TreeModel model = random_tree(rng, 1, 8);
        const AdaptedProcess barrier = random_process(rng, model.steps(), -1.0, 1.0);
        const auto check = check_classical_coincidence(barrier, model);
        CHECK(check.passed);
        CHECK(check.worst <= 1e-8);
    }
}

TEST_CASE("bar substitution leaves the envelope unchanged") {
    InstanceRng rng(503);
    SUBCASE("obstacle already above the left barrier values") {
        const TreeModel model = random_tree(rng, 3, 6);
        LowerData d = random_lower_data(rng, model);
        d.lower_measurable = AdaptedProcess::build(model.steps(), [&](int k, int j) {
            return left_min(d.lower_rcll, k, j) + rng.uniform(0.0, 0.5);
        });
        const auto check = check_bar_substitution(d, model);
        CHECK(check.passed);
        CHECK(check.worst == 0.0);  // substitution is the identity
    }
    SUBCASE("obstacle below the left barrier values") {
        const TreeModel model = random_tree(rng, 3, 6);
        LowerData d = random_lower_data(rng, model);
        d.lower_measurable = AdaptedProcess::build(model.steps(), [&](int k, int j) {
            return left_min(d.lower_rcll, k, j) - rng.uniform(0.0, 0.5);
        });
        CHECK(check_bar_substitution(d, model).passed);
    }
    SUBCASE("random instances") {
        for (int trial = 0; trial < 15; ++trial) {
            const TreeModel model = random_tree(rng, 2, 8);
            const LowerData d = random_lower_data(rng, model);
            const auto check = check_bar_substitution(d, model);
            CHECK(check.passed);
            CHECK(check.worst <= 1e-8);
        }
    }
}

TEST_CASE("monotone in the data") {
    InstanceRng rng(504);
    SUBCASE("identical data gives equality") {
        const TreeModel model = random_tree(rng, 3, 6);
        const LowerData d = random_lower_data(rng, model);
        const auto check = check_monotone(d, d, model);
        CHECK(check.passed);
        CHECK(check.worst <= 0.0);
    }
    SUBCASE("lower terminal value strictly decreases the envelope") {
        const TreeModel model(TimeGrid(4, 1.0));
        LowerData d;
        d.lower_rcll = AdaptedProcess::constant(4, -5.0);
        d.lower_measurable = AdaptedProcess::constant(4, -5.0);
        d.measure = MonotoneMeasure::zero(4);
        d.terminal.assign(5, 1.0);
        LowerData smaller = d;
        smaller.terminal.assign(5, 0.0);
        const auto check = check_monotone(d, smaller, model);
        CHECK(check.passed);
        const auto big = generalized_snell(d, model);
        const auto small = generalized_snell(smaller, model);
        CHECK(small.envelope.at(0, 0) < big.envelope.at(0, 0));
    }
    SUBCASE("precondition violations are named") {
        const TreeModel model(TimeGrid(3, 1.0));
        LowerData d;
        d.lower_rcll = AdaptedProcess::constant(3, 0.0);
        d.lower_measurable = AdaptedProcess::constant(3, 0.0);
        d.measure = MonotoneMeasure::zero(3);
        d.terminal.assign(4, 0.0);
        LowerData bigger = d;
        bigger.terminal.assign(4, 1.0);
        const auto check = check_monotone(d, bigger, model);
        CHECK_FALSE(check.precondition_ok);
        CHECK(check.detail.find("xi'") != std::string::npos);
    }
}

TEST_CASE("domination of the plain reflected solve") {
    InstanceRng rng(505);
    SUBCASE("zero measure gives equality") {
        const TreeModel model = random_tree(rng, 2, 8);
        LowerData d = random_lower_data(rng, model);
        d.measure = MonotoneMeasure::zero(model.steps());
        const auto check = check_domination(d, model);
        CHECK(check.passed);
        CHECK(check.worst == 0.0);
    }
    SUBCASE("a large charged obstacle lifts ancestors strictly") {
        const TreeModel model(TimeGrid(4, 1.0));
        LowerData d;
        d.lower_rcll = AdaptedProcess::constant(4, 0.0);
        d.lower_measurable = AdaptedProcess::constant(4, 0.0);
        d.lower_measurable.at(2, 1) = 3.0;
        d.measure = MonotoneMeasure::zero(4);
        d.measure.set_increment(2, 1, 1.0);
        d.terminal.assign(5, 0.0);
        const auto check = check_domination(d, model);
        CHECK(check.passed);

        AdaptedProcess with_terminal = d.lower_rcll;
        const auto result = generalized_snell(d, model);
        const AdaptedProcess classical = snell_envelope(with_terminal, model);
        CHECK(result.envelope.at(1, 0) > classical.at(1, 0) + 1.0);
        CHECK(result.envelope.at(0, 0) > classical.at(0, 0) + 0.5);
    }
    SUBCASE("random instances") {
        for (int trial = 0; trial < 15; ++trial) {
            const TreeModel model = random_tree(rng, 2, 8);
            const LowerData d = random_lower_data(rng, model);
            CHECK(check_domination(d, model).passed);
        }
    }
}

TEST_CASE("sandwich: corridors reproduce the envelope") {
    InstanceRng rng(506);
    SUBCASE("the data itself is a corridor") {
        const TreeModel model = random_tree(rng, 3, 6);
        const LowerData d = random_lower_data(rng, model);
        const auto check = check_sandwich(d, d, model);
        CHECK(check.passed);
    }
    SUBCASE("the envelope itself is a corridor barrier") {
        for (int trial = 0; trial < 10; ++trial) {
            const TreeModel model = random_tree(rng, 2, 7);
            const LowerData d = random_lower_data(rng, model);
            const auto check = check_sandwich_self(d, model);
            CHECK(check.passed);
            CHECK(check.worst <= 1e-8);
        }
    }
    SUBCASE("effective barrier corridor") {
        const TreeModel model = random_tree(rng, 3, 7);
        const LowerData d = random_lower_data(rng, model);
        const auto base = generalized_snell(d, model);
        LowerData corridor = d;
        corridor.lower_rcll = AdaptedProcess::build(model.steps(), [&](int k, int j) {
            if (k == model.steps()) return d.lower_rcll.at(k, j);
            double b = d.lower_rcll.at(k, j);
            for (int c = j; c <= j + 1; ++c)
                if (d.measure.charges(k + 1, c))
                    b = std::max(b, d.lower_measurable.at(k + 1, c));
            return std::min(b, base.envelope.at(k, j));
        });
        const auto check = check_sandwich(d, corridor, model);
        CHECK(check.passed);
    }
    SUBCASE("mismatched measure support is rejected") {
        const TreeModel model(TimeGrid(3, 1.0));
        LowerData d;
        d.lower_rcll = AdaptedProcess::constant(3, 0.0);
        d.lower_measurable = AdaptedProcess::constant(3, 0.0);
        d.measure = MonotoneMeasure::zero(3);
        d.terminal.assign(4, 0.0);
        LowerData corridor = d;
        corridor.measure.set_increment(1, 0, 1.0);
        const auto check = check_sandwich(d, corridor, model);
        CHECK_FALSE(check.precondition_ok);
    }
}

TEST_CASE("atom split checks") {
    SUBCASE("no atoms reduces to the charged-node constraint") {
        const TreeModel model(TimeGrid(4, 1.0));
        LowerData d;
        d.lower_rcll = AdaptedProcess::constant(4, 0.5);
        d.lower_measurable = AdaptedProcess::constant(4, 0.3);  // below the barrier
        d.measure = MonotoneMeasure::zero(4);
        for (int j = 0; j <= 2; ++j) d.measure.set_increment(2, j, 1.0);
        d.terminal.assign(5, 0.5);
        const auto check = check_atom_split(d, model);
        CHECK(check.passed);
    }
    SUBCASE("terminal atom pushes the pre-terminal value to the obstacle") {
        const TreeModel model(TimeGrid(3, 1.0));
        LowerData d;
        d.lower_rcll = AdaptedProcess::constant(3, -5.0);
        d.lower_measurable = AdaptedProcess::constant(3, 1.0);
        d.measure = MonotoneMeasure::zero(3);
        d.measure.add_atom(3, 1.0);
        d.terminal.assign(4, 0.0);  // below the terminal obstacle
        const auto check = check_atom_split(d, model);
        CHECK(check.passed);
        const auto result = generalized_snell(d, model, {{}, 1e-8, true, 0x5eed, 8, 8});
        CHECK(std::abs(result.envelope.at(2, 0) - 1.0) <= 2e-6);
    }
    SUBCASE("interior atom at step 3 of a depth-6 tree") {
        const TreeModel model(TimeGrid(6, 1.0));
        InstanceRng rng(507);
        LowerData d;
        d.lower_rcll = random_process(rng, 6, -1.0, 0.0);
        d.lower_measurable = random_process(rng, 6, 0.5, 1.5);
        d.measure = MonotoneMeasure::zero(6);
        d.measure.add_atom(3, 1.0);
        d.terminal.assign(7, 0.0);
        const auto check = check_atom_split(d, model);
        CHECK(check.passed);
    }
}

TEST_CASE("uniformly charged measure") {
    SUBCASE("rejects data with the barrier above the obstacle") {
        const TreeModel model(TimeGrid(3, 1.0));
        CHECK_THROWS_AS(lebesgue_example(AdaptedProcess::constant(3, 1.0),
                                         AdaptedProcess::constant(3, 0.0),
                                         std::vector<double>(4, 0.0), model),
                        std::invalid_argument);
    }
    SUBCASE("time-decreasing barrier equal to the obstacle reduces to the classical solve") {
        const TreeModel model(TimeGrid(5, 1.0));
        const AdaptedProcess l = AdaptedProcess::build(
            5, [&](int k, int) { return 1.0 - 0.1 * model.grid.time(k); });
        std::vector<double> xi(6);
        for (int j = 0; j <= 5; ++j) xi[j] = l.at(5, j);
        const auto result = lebesgue_example(l, l, xi, model);
        AdaptedProcess with_terminal = l;
        const AdaptedProcess classical = snell_envelope(with_terminal, model);
        CHECK(sup_distance(result.envelope, classical) <= 1e-8);
    }
    SUBCASE("constant obstacle above a low barrier dominates everywhere") {
        const TreeModel model(TimeGrid(6, 1.0));
        const AdaptedProcess lower = AdaptedProcess::constant(6, -3.0);
        const AdaptedProcess obstacle = AdaptedProcess::constant(6, 0.75);
        std::vector<double> xi(7, 0.75);
        const auto result = lebesgue_example(lower, obstacle, xi, model,
                                             {{}, 1e-8, true, 0x5eed, 8, 8});
        for (int k = 0; k <= 6; ++k)
            for (int j = 0; j <= k; ++j)
                CHECK(result.envelope.at(k, j) >= 0.75 - 2e-5);
        // and it is exactly the envelope of the obstacle up to the floor
        const AdaptedProcess reference = snell_envelope(obstacle, model);
        CHECK(sup_distance(result.envelope, reference) <= 2e-5);
    }
    SUBCASE("american-style payoff stays within the one-step payoff band") {
        const int n = 16;
        const TreeModel model(TimeGrid(n, 1.0));
        const double strike = 1.0, s0 = 1.0, sigma = 0.4;
        const AdaptedProcess payoff = AdaptedProcess::build(n, [&](int k, int j) {
            const double t = model.grid.time(k);
            const double s = s0 * std::exp(sigma * model.brownian(k, j) - 0.5 * sigma * sigma * t);
            return std::max(strike - s, 0.0);
        });
        const AdaptedProcess lower = shifted(payoff, -0.01);
        std::vector<double> xi(payoff.terminal().begin(), payoff.terminal().end());
        const auto result = lebesgue_example(lower, payoff, xi, model);
        const AdaptedProcess reference = snell_envelope(payoff, model);
        double band = 0.0;  // largest payoff move across one branch
        for (int k = 0; k < n; ++k)
            for (int j = 0; j <= k; ++j)
                for (int c = j; c <= j + 1; ++c)
                    band = std::max(band, std::abs(payoff.at(k + 1, c) - payoff.at(k, j)));
        CHECK(std::abs(result.envelope.at(0, 0) - reference.at(0, 0)) <= band + 1e-6);
    }
}

TEST_CASE("idempotence: the envelope of its own output is itself") {
    InstanceRng rng(508);
    for (int trial = 0; trial < 10; ++trial) {
        const TreeModel model = random_tree(rng, 2, 7);
        const LowerData d = random_lower_data(rng, model);
        const auto base = generalized_snell(d, model);
        const auto again = generalized_snell(zero_measure_data(base.envelope), model);
        for (int k = 0; k <= model.steps(); ++k)
            for (int j = 0; j <= k; ++j)
                CHECK(again.envelope.at(k, j) <= base.envelope.at(k, j) + 1e-10);
        // the envelope is a supermartingale, so reflecting on it changes nothing
        CHECK(sup_distance(again.envelope, base.envelope) <= 1e-10);
    }
}

TEST_CASE("harness suites pass at unit scale") {
    const auto coincidence = run_coincidence_suite(11, 8, 10, 5);
    CHECK(coincidence.passed());
    const auto corollary = run_corollary_suite(12, 8, 8);
    CHECK(corollary.passed());
    const auto comparison = run_comparison_suite(13, 8, 20);
    CHECK(comparison.passed());
    const auto atoms = run_atom_split_suite(14, 8, 10);
    CHECK(atoms.passed());
}
