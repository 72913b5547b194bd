#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hycharge/ev.hpp"
#include "hycharge/network.hpp"
#include "hycharge/step.hpp"
#include "helpers.hpp"

using namespace hycharge;
using hycharge::test::make_problem;
using hycharge::test::make_request;

TEST_CASE("potential charging demand") {
    CHECK(potential_demand(1.0, 75.0, 0.0, 0.014) == 0.0);
    CHECK(potential_demand(0.5, 75.0, 10.0, 0.014) == Catch::Approx(37.64));
    CHECK(potential_demand(0.0, 75.0, 0.0, 0.014) == 75.0);
    CHECK_THROWS_AS(potential_demand(0.5, 75.0, -1.0, 0.014), std::invalid_argument);
}

TEST_CASE("per-assignment cost, term by term") {
    CostConstants k;  // wait 17.2, idle 21, depreciation 0.025, eta 0.92, rates 44/88

    SECTION("vacant EV") {
        const CostTerms t = assignment_cost_terms(0.5, 75.0, false, 60.0, 10.0, 0.0, 5.0, 0.5, k);
        // worked out by hand: demand 37.64 kWh at 44 kW and 92% efficiency
        const double e_pot = 37.5 + 0.014 * 10.0;
        CHECK(t.charge == Catch::Approx(e_pot * 0.5));
        CHECK(t.idle == Catch::Approx(21.0 * e_pot / (44.0 * 0.92)));
        CHECK(t.wait == 0.0);
        CHECK(t.depreciation == Catch::Approx(0.025 * 15.0));
        CHECK(t.total() == Catch::Approx(38.72).margin(0.005));
    }
    SECTION("loaded EV includes the onward leg and waits instead of idling") {
        const CostTerms t = assignment_cost_terms(0.5, 75.0, true, 60.0, 10.0, 8.0, 5.0, 0.5, k);
        const double e_pot = 37.64;
        CHECK(t.charge == Catch::Approx(e_pot * 0.5));
        CHECK(t.wait == Catch::Approx(17.2 * ((10.0 + 8.0) / 60.0 + e_pot / (88.0 * 0.92))));
        CHECK(t.idle == 0.0);
        CHECK(t.depreciation == Catch::Approx(0.025 * (5.0 + 10.0 + 8.0)));
        CHECK(t.total() ==
              Catch::Approx(18.82 + 17.2 * (0.3 + 37.64 / 80.96) + 0.575).margin(1e-9));
    }
    SECTION("no demand and no distance means no cost") {
        const CostTerms t = assignment_cost_terms(1.0, 75.0, false, 60.0, 0.0, 0.0, 0.0, 0.5, k);
        CHECK(t.total() == 0.0);
    }
    SECTION("nondecreasing in distance and price") {
        double last = -1.0;
        for (double d = 0.0; d <= 14.0; d += 1.0) {
            const double c = assignment_cost_terms(0.5, 75.0, true, 60.0, d, 4.0, 2.0, 0.6, k)
                                 .total();
            CHECK(c >= last);
            last = c;
        }
        last = -1.0;
        for (double beta = 0.0; beta <= 1.2; beta += 0.1) {
            const double c = assignment_cost_terms(0.5, 75.0, false, 60.0, 5.0, 0.0, 2.0, beta, k)
                                 .total();
            CHECK(c >= last);
            last = c;
        }
    }
    SECTION("vacant cost ignores the destination leg") {
        const double a = assignment_cost_terms(0.4, 75.0, false, 60.0, 6.0, 0.0, 1.0, 0.5, k)
                             .total();
        const double b = assignment_cost_terms(0.4, 75.0, false, 60.0, 6.0, 25.0, 1.0, 0.5, k)
                             .total();
        CHECK(a == b);
    }
}

TEST_CASE("network-resolved assignment cost") {
    const RoadNetwork net(3, {{0, 1, 3.0}, {1, 2, 4.0}, {0, 2, 10.0}}, {1}, {0});
    EvState ev;
    ev.requesting = true;
    ev.soc = 0.5;
    ev.position = 0;
    ev.loaded = true;
    ev.destination = 2;
    CostConstants k;
    const double cost = ev_assignment_cost(ev, 0, {0.5}, net, 2.0, k);
    const CostTerms expect = assignment_cost_terms(0.5, 75.0, true, 60.0, 3.0, 4.0, 2.0, 0.5, k);
    CHECK(cost == Catch::Approx(expect.total()));
    ev.requesting = false;
    CHECK_THROWS_AS(ev_assignment_cost(ev, 0, {0.5}, net, 2.0, k), std::invalid_argument);
}

TEST_CASE("step objective") {
    SECTION("no requests and no dispatch leaves maintenance only") {
        StepProblem p = make_problem(2, 1);
        p.hps[0].p_wind_kw = 1000.0;
        p.hps[0].p_pv_kw = 500.0;
        const CostBreakdown c = step_objective(p, {}, zero_dispatch(p));
        CHECK(c.total == Catch::Approx(0.018 * 1500.0));
        CHECK(c.penalty == 0.0);
        CHECK(c.charge == 0.0);
    }
    SECTION("an unserved request books the penalty factor") {
        StepProblem p = make_problem(1, 1);
        p.requests.push_back(make_request(0, 0.5, false, {5.0}));
        const CostBreakdown c = step_objective(p, {Assignment{}}, zero_dispatch(p));
        CHECK(c.penalty == Catch::Approx(p.consts.gamma));
        CHECK(c.unserved == 1);
    }
    SECTION("split by decision variable is a partition") {
        StepProblem p = make_problem(2, 2);
        p.hps[0].p_hydrogen_kw = 100.0;
        p.hps[1].p_hydrogen_kw = 50.0;
        p.hps[0].p_wind_kw = 800.0;
        p.requests.push_back(make_request(0, 0.4, true, {5.0, 9.0}, {3.0, 6.0}, 2.0));
        p.requests.push_back(make_request(1, 0.7, false, {7.0, 2.0}));
        Matrix<double> h = zero_dispatch(p);
        h(0, 0) = 60.0;
        h(1, 1) = 20.0;
        const CostBreakdown c =
            step_objective(p, {Assignment{0, false}, Assignment{1, false}}, h);
        CHECK(c.dispatch_part() + c.coupling_part() + c.assignment_part() ==
              Catch::Approx(c.total));
    }
    SECTION("matches a naive recomputation") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            StepProblem p = make_problem(2, 1, 2);
            p.next_slots = {1, 0};
            p.hps[0].p_hydrogen_kw = 120.0;
            p.hps[0].p_wind_kw = 500.0 * unit(rng);
            p.requests.push_back(
                make_request(0, 0.3 + 0.4 * unit(rng), unit(rng) < 0.5, {4.0, 8.0}, {2.0, 5.0}));
            p.requests.push_back(
                make_request(1, 0.3 + 0.4 * unit(rng), unit(rng) < 0.5, {6.0, 3.0}, {7.0, 1.0}));
            std::vector<Assignment> assign = {Assignment{0, unit(rng) < 0.3},
                                              Assignment{1, false}};
            Matrix<double> h = zero_dispatch(p);
            h(0, 0) = 120.0 * unit(rng) * 0.5;
            h(0, 1) = 120.0 * unit(rng) * 0.5;
            const CostBreakdown got = step_objective(p, assign, h);

            // independent re-summation, term by term
            double expect = 0.0;
            const std::vector<double> prices = station_prices(p, h);
            for (int r = 0; r < 2; ++r) {
                const auto& rv = p.requests[r];
                const int i = assign[r].fcs;
                const double e_pot = (1.0 - rv.soc) * rv.capacity_kwh +
                                     p.consts.loss_kwh_per_km * rv.dist_to_fcs_km[i];
                const double power = rv.loaded ? 88.0 : 44.0;
                expect += e_pot * prices[i];
                const double charge_h = e_pot / (power * 0.92);
                if (rv.loaded)
                    expect += 17.2 * ((rv.dist_to_fcs_km[i] + rv.fcs_to_dest_km[i]) / 60.0 +
                                      charge_h);
                else
                    expect += 21.0 * charge_h;
                expect += 0.025 * (rv.origin_leg_km + rv.dist_to_fcs_km[i] +
                                   (rv.loaded ? rv.fcs_to_dest_km[i] : 0.0));
                expect += 0.018 * power;
                if (assign[r].deferred) expect += 17.2 * 0.25;
            }
            expect += 0.018 * p.hps[0].p_wind_kw;
            expect += 0.04 * (h(0, 0) + h(0, 1));
            CHECK(got.total == Catch::Approx(expect).margin(1e-9));
        }
    }
    SECTION("constraint violations are rejected by name") {
        StepProblem p = make_problem(1, 1);
        p.requests.push_back(make_request(0, 0.5, false, {20.0}));  // unreachable at 60 km/h
        CHECK_THROWS_WITH(step_objective(p, {Assignment{0, false}}, zero_dispatch(p)),
                          Catch::Matchers::ContainsSubstring("unreachable"));

        StepProblem q = make_problem(1, 1, 1);
        q.requests.push_back(make_request(0, 0.5, false, {5.0}));
        q.requests.push_back(make_request(1, 0.5, false, {5.0}));
        CHECK_THROWS_WITH(
            step_objective(q, {Assignment{0, false}, Assignment{0, false}}, zero_dispatch(q)),
            Catch::Matchers::ContainsSubstring("free piles"));

        StepProblem s = make_problem(1, 1);
        Matrix<double> h = zero_dispatch(s);
        h(0, 0) = 10.0;  // nothing available
        CHECK_THROWS_WITH(step_objective(s, {}, h),
                          Catch::Matchers::ContainsSubstring("hydrogen"));
    }
}
