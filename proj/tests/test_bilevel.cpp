#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "hycharge/bilevel.hpp"
#include "hycharge/oracle.hpp"
#include "helpers.hpp"

using namespace hycharge;
using hycharge::test::make_problem;
using hycharge::test::make_request;

namespace {

OptimizeOptions exact_options() {
    OptimizeOptions o;
    o.epsilon = 1e-9;
    o.max_iterations = 200;
    return o;
}

} // namespace

TEST_CASE("empty step converges immediately") {
    StepProblem p = make_problem(2, 1);
    p.hps[0].p_wind_kw = 900.0;
    const StepDecision d = optimize_step(p, exact_options());
    CHECK(d.trace.converged);
    CHECK(d.trace.iterations() == 1);
    CHECK(d.cost.total == Catch::Approx(0.018 * 900.0));
    CHECK(d.cost.charge == 0.0);
}

TEST_CASE("alternation reaches the enumerated joint optimum") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 80; ++trial) {
        const SmallInstance inst = random_small_instance(rng);
        const JointOptimum ref = enumerate_joint_optimum(inst);
        const StepDecision got = optimize_step(inst.problem, exact_options());
        INFO("trial " << trial << " enumerated " << ref.enumerated);
        CHECK(got.cost.total == Catch::Approx(ref.j).margin(1e-6));
    }
}

TEST_CASE("traces are monotone and end at a fixed point") {
    std::mt19937_64 rng(321);
    for (int trial = 0; trial < 40; ++trial) {
        SmallInstance inst = random_small_instance(rng);
        const StepDecision d = optimize_step(inst.problem, exact_options());
        const Verdict v = check_monotone_trace(d.trace);
        INFO(v.witness);
        CHECK(v.pass);

        // one more matching + dispatch round must not move the cost
        const std::vector<double> prices = station_prices(inst.problem, d.dispatch);
        const AssignmentResult km =
            solve_matching(build_extended_graph(inst.problem, prices));
        const DispatchResult lp = optimal_dispatch(inst.problem, km.assignments);
        const double j_again =
            step_objective(inst.problem, km.assignments, lp.dispatch).total;
        CHECK(j_again <= d.cost.total + 1e-6);
        CHECK(d.cost.total - j_again <= 1e-6);
    }
}

TEST_CASE("any feasible initialization lands on the same cost") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const SmallInstance inst = random_small_instance(rng);
        const StepDecision reference = optimize_step(inst.problem, exact_options());
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            OptimizeOptions o = exact_options();
            o.random_init = true;
            o.init_seed = seed;
            const StepDecision d = optimize_step(inst.problem, o);
            CHECK(d.cost.total == Catch::Approx(reference.cost.total).margin(1e-6));
        }
    }
}

TEST_CASE("iteration counts stay small") {
    std::mt19937_64 rng(55);
    double total_iters = 0.0;
    int runs = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const SmallInstance inst = random_small_instance(rng);
        const StepDecision d = optimize_step(inst.problem, exact_options());
        total_iters += d.trace.iterations();
        runs += 1;
        CHECK(d.trace.converged);
    }
    CHECK(total_iters / runs < 10.0);
}

TEST_CASE("undersized penalty factor is reported") {
    StepProblem p = make_problem(1, 1, 2);
    p.requests.push_back(make_request(0, 0.2, false, {5.0}));
    p.requests.push_back(make_request(1, 0.3, false, {4.0}));
    // between the costliest single pairing and the full bound: serving stays
    // monotone, the bound warning still fires
    p.consts.gamma = gamma_bound(p) * 0.75;
    std::ostringstream warnings;
    OptimizeOptions o = exact_options();
    o.warnings = &warnings;
    const StepDecision d = optimize_step(p, o);
    CHECK(d.trace.gamma_below_bound);
    CHECK(warnings.str().find("penalty factor") != std::string::npos);
}

TEST_CASE("options are validated") {
    StepProblem p = make_problem(1, 1);
    OptimizeOptions o;
    o.epsilon = 0.0;
    CHECK_THROWS_AS(optimize_step(p, o), std::invalid_argument);
    o.epsilon = 1.0;
    o.max_iterations = 0;
    CHECK_THROWS_AS(optimize_step(p, o), std::invalid_argument);
}
