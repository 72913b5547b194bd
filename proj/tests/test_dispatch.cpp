#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hycharge/dispatch.hpp"
#include "helpers.hpp"

using namespace hycharge;
using hycharge::test::make_problem;
using hycharge::test::make_request;

TEST_CASE("no charging demand means no dispatch") {
    StepProblem p = make_problem(2, 2);
    p.hps[0].p_hydrogen_kw = 300.0;
    p.hps[1].p_hydrogen_kw = 100.0;
    const DispatchResult r = optimal_dispatch(p, {});
    REQUIRE(r.optimal);
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i) CHECK(r.dispatch(k, i) <= 1e-9);
    CHECK(r.objective == Catch::Approx(step_objective(p, {}, r.dispatch).total));
}

TEST_CASE("single pair follows the marginal saving") {
    // one station, one plant: a kW of hydrogen saves E * tou / (base + demand)
    // in charge cost and costs the delivery rate
    StepProblem p = make_problem(1, 1);
    p.requests.push_back(make_request(0, 0.2, false, {5.0}));
    const std::vector<Assignment> serve{Assignment{0, false}};
    const double e_pot = p.request_demand_kwh(0, 0);
    const double denom = p.base_load_kw[0] + p.demand_kwh[0];

    SECTION("profitable hydrogen is dispatched up to the need") {
        p.hps[0].p_hydrogen_kw = 150.0;
        p.tou_price = 1.0;  // e_pot/denom ~ 0.2 CNY/kW vs delivery 0.04
        REQUIRE(e_pot * p.tou_price / denom > p.hps[0].delivery_per_kw);
        const DispatchResult r = optimal_dispatch(p, serve);
        CHECK(r.dispatch(0, 0) == Catch::Approx(150.0));  // supply-limited
        p.hps[0].p_hydrogen_kw = 500.0;
        const DispatchResult full = optimal_dispatch(p, serve);
        CHECK(full.dispatch(0, 0) == Catch::Approx(denom));  // demand-limited
    }
    SECTION("unprofitable hydrogen stays home") {
        p.hps[0].p_hydrogen_kw = 150.0;
        p.tou_price = 0.1;
        p.hps[0].delivery_per_kw = 0.2;  // higher than any possible saving
        REQUIRE(e_pot * p.tou_price / denom < p.hps[0].delivery_per_kw);
        const DispatchResult r = optimal_dispatch(p, serve);
        CHECK(r.dispatch(0, 0) <= 1e-9);
    }
}

TEST_CASE("two-by-two instance matches a fine grid search") {
    StepProblem p = make_problem(2, 2);
    p.base_load_kw = {60.0, 90.0};
    p.demand_kwh = {40.0, 20.0};
    p.hps[0].p_hydrogen_kw = 35.0;
    p.hps[1].p_hydrogen_kw = 20.0;
    p.hps[0].delivery_per_kw = 0.05;
    p.hps[1].delivery_per_kw = 0.02;
    p.requests.push_back(make_request(0, 0.1, false, {4.0, 7.0}));
    p.requests.push_back(make_request(1, 0.3, true, {6.0, 3.0}, {2.0, 4.0}));
    const std::vector<Assignment> assign{Assignment{0, false}, Assignment{1, false}};

    const DispatchResult lp = optimal_dispatch(p, assign);
    const double j_lp = step_objective(p, assign, lp.dispatch).total;

    double j_grid = std::numeric_limits<double>::infinity();
    Matrix<double> h = zero_dispatch(p);
    for (int a = 0; a <= 35; ++a)
        for (int b = 0; a + b <= 35; ++b)
            for (int c = 0; c <= 20; ++c)
                for (int d = 0; c + d <= 20; ++d) {
                    h(0, 0) = a;
                    h(0, 1) = b;
                    h(1, 0) = c;
                    h(1, 1) = d;
                    j_grid = std::min(j_grid, step_objective(p, assign, h).total);
                }

    // the LP can only be at or below any grid point, and the grid minimum is
    // within one Lipschitz step of the true optimum
    CHECK(j_lp <= j_grid + 1e-9);
    double lipschitz = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double e_i = p.request_demand_kwh(i, i);
        lipschitz = std::max(lipschitz,
                             e_i * p.tou_price / (p.base_load_kw[i] + p.demand_kwh[i]) + 0.05);
    }
    CHECK(j_lp >= j_grid - 4.0 * lipschitz);
}

TEST_CASE("price ratio variables are tight at the optimum") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        StepProblem p = make_problem(2, 2);
        p.base_load_kw = {50.0 + 200.0 * unit(rng), 50.0 + 200.0 * unit(rng)};
        p.demand_kwh = {100.0 * unit(rng), 100.0 * unit(rng)};
        p.hps[0].p_hydrogen_kw = 400.0 * unit(rng);
        p.hps[1].p_hydrogen_kw = 400.0 * unit(rng);
        p.tou_price = 0.3 + unit(rng);
        // both stations have paying customers, so both ratios bind
        p.requests.push_back(make_request(0, 0.2, false, {4.0, 9.0}));
        p.requests.push_back(make_request(1, 0.4, true, {8.0, 3.0}, {2.0, 2.0}));
        const std::vector<Assignment> assign{Assignment{0, false}, Assignment{1, false}};
        const DispatchLp lp = build_lp(p, assign);
        const DispatchResult r = solve_lp(lp, p);
        for (int i = 0; i < 2; ++i) {
            const double denom = p.base_load_kw[i] + p.demand_kwh[i];
            const double ratio = std::max((denom - r.dispatch.col_sum(i)) / denom, 0.0);
            CHECK(r.price_ratio[i] == Catch::Approx(ratio).margin(1e-7));
        }
    }
}

TEST_CASE("more supply never raises the optimal cost") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        StepProblem p = make_problem(3, 2, 2);
        p.hps[0].p_hydrogen_kw = 300.0 * unit(rng);
        p.hps[1].p_hydrogen_kw = 300.0 * unit(rng);
        for (int r = 0; r < 4; ++r)
            p.requests.push_back(make_request(r, 0.1 + 0.6 * unit(rng), (rng() % 2) == 0,
                                              {3.0 + 8.0 * unit(rng), 3.0 + 8.0 * unit(rng),
                                               3.0 + 8.0 * unit(rng)},
                                              {2.0, 2.0, 2.0}));
        std::vector<Assignment> assign(4);
        for (int r = 0; r < 4; ++r) assign[r] = {r % 3, false};
        const double before = step_objective(p, assign,
                                             optimal_dispatch(p, assign).dispatch).total;
        p.hps[0].p_hydrogen_kw += 100.0;
        const double after = step_objective(p, assign,
                                            optimal_dispatch(p, assign).dispatch).total;
        CHECK(after <= before + 1e-7);
    }
}

TEST_CASE("dispatch respects the supply mask and caps") {
    StepProblem p = make_problem(2, 2);
    p.supply(0, 1) = 0;
    p.supply(1, 0) = 0;
    p.hps[0].p_hydrogen_kw = 100.0;
    p.hps[1].p_hydrogen_kw = 80.0;
    p.requests.push_back(make_request(0, 0.1, false, {4.0, 6.0}));
    p.requests.push_back(make_request(1, 0.2, false, {6.0, 4.0}));
    const std::vector<Assignment> assign{Assignment{0, false}, Assignment{1, false}};
    const DispatchResult r = optimal_dispatch(p, assign);
    CHECK(r.dispatch(0, 1) == 0.0);
    CHECK(r.dispatch(1, 0) == 0.0);
    CHECK(r.dispatch.row_sum(0) <= 100.0 + 1e-9);
    CHECK(r.dispatch.row_sum(1) <= 80.0 + 1e-9);
    CHECK_NOTHROW(step_objective(p, assign, r.dispatch));
}

TEST_CASE("lp text dump names the dispatch variables") {
    StepProblem p = make_problem(1, 1);
    p.requests.push_back(make_request(0, 0.5, false, {5.0}));
    const DispatchLp lp = build_lp(p, {Assignment{0, false}});
    const std::string text = lp_to_text(lp.lp);
    CHECK(text.find("h_0_0") != std::string::npos);
    CHECK(text.find("ratio_0") != std::string::npos);
}
