#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hycharge/dispatch.hpp"
#include "hycharge/matching.hpp"
#include "hycharge/step.hpp"

namespace hycharge {

/// Objective values along one alternation, half-step by half-step. The
/// recorded sequence must never increase; the engine treats a rise beyond
/// numerical tolerance as a hard failure.
struct IterationTrace {
    struct Round {
        double j_after_matching = 0.0;
        double j_after_dispatch = 0.0;
    };
    double initial_j = 0.0;
    std::vector<Round> rounds;
    bool converged = false;
    bool gamma_below_bound = false;

    int iterations() const { return static_cast<int>(rounds.size()); }

    std::vector<double> sequence() const {
        std::vector<double> s{initial_j};
        for (const Round& r : rounds) {
            s.push_back(r.j_after_matching);
            s.push_back(r.j_after_dispatch);
        }
        return s;
    }
};

struct OptimizeOptions {
    double epsilon = 2.0;     // CNY, stop when a full round moves J less
    int max_iterations = 50;
    bool random_init = false;
    std::uint64_t init_seed = 0;
    std::ostream* warnings = nullptr;
    // optional warm starts, e.g. the greedy baselines' schedules
    std::vector<std::vector<Assignment>> seed_assignments;
};

struct StepDecision {
    std::vector<Assignment> assignments;
    Matrix<double> dispatch;
    CostBreakdown cost;
    IterationTrace trace;
};

namespace detail {

inline Matrix<double> random_feasible_dispatch(const StepProblem& p, std::mt19937_64& rng) {
    Matrix<double> h = zero_dispatch(p);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < p.num_hps(); ++k) {
        std::vector<int> reach;
        for (int i = 0; i < p.num_fcs(); ++i)
            if (p.supply(k, i)) reach.push_back(i);
        if (reach.empty()) continue;
        const double budget = unit(rng) * p.hps[k].p_hydrogen_kw;
        std::vector<double> share(reach.size());
        double total = 0.0;
        for (double& s : share) total += (s = unit(rng));
        if (total <= 0.0) continue;
        for (std::size_t c = 0; c < reach.size(); ++c)
            h(k, reach[c]) = budget * share[c] / total;
    }
    return h;
}

/// The alternation itself: matching against the posted prices, then the
/// dispatch LP, until a full round moves the cost by at most epsilon.
inline StepDecision alternate(const StepProblem& p, Matrix<double> dispatch,
                              const OptimizeOptions& opt) {
    StepDecision out;
    std::vector<Assignment> assign(p.num_requests());
    double j_round = step_objective(p, assign, dispatch).total;
    out.trace.initial_j = j_round;
    double j_prev_recorded = j_round;

    auto record = [&](double j, const char* where) {
        if (j > j_prev_recorded + 1e-6)
            throw std::logic_error(std::string("optimize_step: cost increased after ") + where +
                                   " (is the penalty factor below its bound?)");
        j_prev_recorded = j;
    };

    for (int it = 0; it < opt.max_iterations; ++it) {
        const std::vector<double> prices = station_prices(p, dispatch);
        const AssignmentResult matched = solve_matching(build_extended_graph(p, prices));
        assign = matched.assignments;
        const double j_matching = step_objective(p, assign, dispatch).total;
        record(j_matching, "matching");

        const DispatchResult lp = optimal_dispatch(p, assign);
        dispatch = lp.dispatch;
        const double j_dispatch = step_objective(p, assign, dispatch).total;
        record(j_dispatch, "dispatch");
        if (std::abs(j_dispatch - lp.objective) > 1e-6)
            throw std::logic_error("optimize_step: dispatch LP objective disagrees with the "
                                   "step cost (price linearization broken)");

        out.trace.rounds.push_back({j_matching, j_dispatch});
        const double delta = std::abs(j_dispatch - j_round);
        j_round = j_dispatch;
        if (delta <= opt.epsilon) {
            out.trace.converged = true;
            break;
        }
    }

    out.assignments = std::move(assign);
    out.dispatch = std::move(dispatch);
    out.cost = step_objective(p, out.assignments, out.dispatch);
    return out;
}

inline std::uint64_t dispatch_fingerprint(const Matrix<double>& h) {
    std::uint64_t acc = 1469598103934665603ULL;
    for (std::size_t k = 0; k < h.rows(); ++k)
        for (std::size_t i = 0; i < h.cols(); ++i) {
            std::uint64_t bits;
            const double v = h(k, i);
            __builtin_memcpy(&bits, &v, sizeof(bits));
            acc = (acc ^ bits) * 1099511628211ULL;
        }
    return acc;
}

} // namespace detail

/// Per-step joint optimization. The alternation is run from a small set of
/// deterministic starting dispatches (idle, one saturated station at a time,
/// spread, concentrated, and the warm starts' own dispatch optima); each run
/// only ever lowers the cost, and the cheapest finishing point wins. The
/// multiple starts matter: a single run can settle where neither level moves
/// alone although moving the schedule and the dispatch together would still
/// save money.
inline StepDecision optimize_step(const StepProblem& p, const OptimizeOptions& opt = {}) {
    if (opt.epsilon <= 0.0) throw std::invalid_argument("optimize_step: epsilon must be positive");
    if (opt.max_iterations < 1)
        throw std::invalid_argument("optimize_step: need at least one iteration");

    const bool gamma_low = p.consts.gamma < gamma_bound(p) - 1e-9;
    if (gamma_low && opt.warnings)
        *opt.warnings << "warning: penalty factor " << p.consts.gamma
                      << " is below the service-priority bound " << gamma_bound(p)
                      << "; matching may not minimize the step cost\n";

    std::vector<Matrix<double>> starts;
    std::vector<std::uint64_t> seen;
    auto push_start = [&](Matrix<double> h) {
        const std::uint64_t fp = detail::dispatch_fingerprint(h);
        for (std::uint64_t s : seen)
            if (s == fp) return;
        seen.push_back(fp);
        starts.push_back(std::move(h));
    };

    std::vector<int> in_play;
    for (int i = 0; i < p.num_fcs(); ++i) {
        bool reachable_by_someone = false;
        for (const RequestView& r : p.requests) reachable_by_someone |= r.reachable[i] != 0;
        if (reachable_by_someone) in_play.push_back(i);
    }
    // each start costs one O(n^3) matching per round; past a few hundred
    // piles the exploration set is trimmed to the rule-shaped starts
    const bool wide = p.total_slots() + p.num_requests() > 400;

    push_start(zero_dispatch(p));
    if (!in_play.empty() && !wide) {
        if (in_play.size() <= 4) {
            // small problems afford the full sweep of saturation orders up
            // to three stations deep
            std::vector<std::vector<int>> orders;
            for (int a : in_play) {
                orders.push_back({a});
                for (int b : in_play) {
                    if (b == a) continue;
                    orders.push_back({a, b});
                    for (int c : in_play)
                        if (c != a && c != b) orders.push_back({a, b, c});
                }
            }
            for (const auto& order : orders) push_start(saturate_stations_dispatch(p, order));
        } else {
            for (int i : in_play) push_start(saturate_station_dispatch(p, i));
        }
    }
    if (!in_play.empty()) {
        push_start(spread_dispatch(p));
        push_start(concentrate_dispatch(p));
    }
    if (opt.random_init) {
        std::mt19937_64 rng(opt.init_seed);
        push_start(detail::random_feasible_dispatch(p, rng));
    }

    StepDecision best;
    bool have_best = false;
    auto consider = [&](StepDecision candidate) {
        if (!have_best || candidate.cost.total < best.cost.total - 1e-12) {
            best = std::move(candidate);
            have_best = true;
            return true;
        }
        return false;
    };

    for (const Matrix<double>& h : starts) consider(detail::alternate(p, h, opt));
    for (const std::vector<Assignment>& seed : opt.seed_assignments) {
        const DispatchResult lp = optimal_dispatch(p, seed);
        StepDecision direct;
        direct.assignments = seed;
        direct.dispatch = lp.dispatch;
        direct.cost = step_objective(p, seed, lp.dispatch);
        direct.trace.initial_j = direct.cost.total;
        direct.trace.converged = true;
        consider(std::move(direct));
        consider(detail::alternate(p, lp.dispatch, opt));
    }

    // a finished run can sit where neither level improves alone although a
    // joint move would: re-run with one more station pushed to free charging
    // on top of the incumbent's saturation pattern until nothing improves
    if (p.num_requests() > 0 && !wide) {
        for (int round = 0; round < 4; ++round) {
            bool improved = false;
            std::vector<int> incumbent_order;
            {
                std::vector<std::pair<double, int>> loads;
                for (int i = 0; i < p.num_fcs(); ++i) {
                    const double got = best.dispatch.col_sum(i);
                    if (got > 1e-9) loads.emplace_back(-got, i);
                }
                std::sort(loads.begin(), loads.end());
                for (const auto& [neg, i] : loads) incumbent_order.push_back(i);
            }
            for (int i = 0; i < p.num_fcs(); ++i) {
                bool reachable_by_someone = false;
                for (const RequestView& r : p.requests)
                    reachable_by_someone |= r.reachable[i] != 0;
                if (!reachable_by_someone) continue;
                std::vector<int> priority{i};
                for (int j : incumbent_order)
                    if (j != i) priority.push_back(j);
                const Matrix<double> h = saturate_stations_dispatch(p, priority);
                const std::uint64_t fp = detail::dispatch_fingerprint(h);
                if (std::find(seen.begin(), seen.end(), fp) != seen.end()) continue;
                seen.push_back(fp);
                improved |= consider(detail::alternate(p, h, opt));
            }
            if (!improved) break;
        }
    }

    best.trace.gamma_below_bound = gamma_low;
    return best;
}

} // namespace hycharge
