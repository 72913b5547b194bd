#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hycharge/bilevel.hpp"
#include "hycharge/scenario.hpp"

namespace hycharge {

enum class Strategy { BiBbg, MinDistance, MinPrice, MinCost, NearDis, AveDis };

inline const std::vector<Strategy>& all_strategies() {
    static const std::vector<Strategy> s = {Strategy::BiBbg,   Strategy::MinDistance,
                                            Strategy::MinPrice, Strategy::MinCost,
                                            Strategy::NearDis,  Strategy::AveDis};
    return s;
}

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::BiBbg: return "BI-BBG";
        case Strategy::MinDistance: return "MinDistance";
        case Strategy::MinPrice: return "MinPrice";
        case Strategy::MinCost: return "MinCost";
        case Strategy::NearDis: return "NearDis";
        case Strategy::AveDis: return "AveDis";
    }
    return "?";
}

inline Strategy parse_strategy(const std::string& name) {
    for (Strategy s : all_strategies())
        if (name == to_string(s)) return s;
    throw std::invalid_argument("unknown strategy: " + name);
}

/// Demand estimate from same-time-of-day history: exponentially weighted
/// average of the most recent observations, newest first; the prior covers
/// the cold start.
inline double ewma_demand(const std::vector<double>& same_slot_history, double prior, int window,
                          double decay) {
    if (same_slot_history.empty()) return prior;
    double num = 0.0, den = 0.0, w = 1.0;
    const int n = static_cast<int>(same_slot_history.size());
    for (int m = 0; m < std::min(window, n); ++m) {
        num += w * same_slot_history[n - 1 - m];
        den += w;
        w *= decay;
    }
    return num / den;
}

inline std::vector<double> estimate_demand(
    const std::vector<std::vector<double>>& same_slot_history_per_fcs, double prior, int window,
    double decay) {
    std::vector<double> d(same_slot_history_per_fcs.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = ewma_demand(same_slot_history_per_fcs[i], prior, window, decay);
    return d;
}

/// Greedy per-EV station choice in arrival order against the given posted
/// prices; free piles first, then next-step piles. Ties go to the lowest
/// station index.
inline std::vector<Assignment> greedy_assignments(const StepProblem& p, Strategy strategy,
                                                  const std::vector<double>& posted_prices) {
    std::vector<Assignment> assign(p.num_requests());
    std::vector<int> now_left = p.now_slots, next_left = p.next_slots;
    for (int r = 0; r < p.num_requests(); ++r) {
        int best = -1;
        double best_key = 0.0;
        for (int i = 0; i < p.num_fcs(); ++i) {
            if (!p.requests[r].reachable[i]) continue;
            if (now_left[i] <= 0 && next_left[i] <= 0) continue;
            double key = 0.0;
            switch (strategy) {
                case Strategy::MinDistance: key = p.requests[r].dist_to_fcs_km[i]; break;
                case Strategy::MinPrice: key = posted_prices[i]; break;
                default: key = p.request_cost_terms(r, i, posted_prices[i]).total(); break;
            }
            if (best < 0 || key < best_key) {
                best = i;
                best_key = key;
            }
        }
        if (best < 0) continue;
        const bool deferred = now_left[best] <= 0;
        assign[r] = {best, deferred};
        (deferred ? next_left : now_left)[best] -= 1;
    }
    return assign;
}

/// Rule-based dispatch: everything to the nearest reachable station, or an
/// equal split over all reachable stations.
inline Matrix<double> rule_dispatch(const StepProblem& p, Strategy strategy) {
    return strategy == Strategy::NearDis ? concentrate_dispatch(p) : spread_dispatch(p);
}

/// One of the five reference strategies: greedy EV choice plus the dispatch
/// LP, or rule-based dispatch plus the matching solver. Greedy choices read
/// the previous step's posted prices, since this step's dispatch is not
/// decided yet.
inline StepDecision baseline_step(const StepProblem& p, Strategy strategy,
                                  const std::vector<double>& carry_prices) {
    StepDecision d;
    switch (strategy) {
        case Strategy::MinDistance:
        case Strategy::MinPrice:
        case Strategy::MinCost:
            d.assignments = greedy_assignments(p, strategy, carry_prices);
            d.dispatch = optimal_dispatch(p, d.assignments).dispatch;
            break;
        case Strategy::NearDis:
        case Strategy::AveDis: {
            d.dispatch = rule_dispatch(p, strategy);
            const std::vector<double> prices = station_prices(p, d.dispatch);
            d.assignments = solve_matching(build_extended_graph(p, prices)).assignments;
            break;
        }
        case Strategy::BiBbg:
            throw std::invalid_argument("baseline_step: BI-BBG is not a baseline");
    }
    d.cost = step_objective(p, d.assignments, d.dispatch);
    return d;
}

struct StepRecord {
    int step = 0;
    CostBreakdown cost;
    int requests = 0;
    int served = 0;
    int deferred = 0;
    int iterations = 0;
    bool converged = true;
    std::uint64_t decision_hash = 0;
    IterationTrace trace;  // populated by the bi-level strategy only
};

struct RunReport {
    std::string strategy;
    std::uint64_t seed = 0;
    std::vector<StepRecord> steps;
    CostBreakdown totals;
    long request_events = 0;  // per-step request count, retries included
    int unique_requests = 0;
    int unique_served = 0;
    int skipped_no_vehicle = 0;
    double service_rate = 1.0;
    double mean_iterations = 0.0;
    bool all_converged = true;
    double wall_seconds = 0.0;  // console-only, never written to report files
};

struct EngineOptions {
    bool random_init = false;
    std::ostream* warnings = nullptr;
};

namespace detail {

inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

inline std::uint64_t decision_hash(const std::vector<Assignment>& assign,
                                   const Matrix<double>& dispatch) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const Assignment& a : assign) {
        h = hash_mix(h, static_cast<std::uint64_t>(a.fcs + 2));
        h = hash_mix(h, a.deferred ? 7 : 3);
    }
    for (std::size_t k = 0; k < dispatch.rows(); ++k)
        for (std::size_t i = 0; i < dispatch.cols(); ++i) {
            std::uint64_t bits;
            const double v = dispatch(k, i);
            static_assert(sizeof(bits) == sizeof(v));
            __builtin_memcpy(&bits, &v, sizeof(bits));
            h = hash_mix(h, bits);
        }
    return h;
}

} // namespace detail

/// Live simulation state plus the step machinery. One instance per
/// (scenario, strategy, seed) run; fully deterministic.
class HorizonEngine {
public:
    HorizonEngine(const Scenario& sc, Strategy strategy, EngineOptions opt = {})
        : sc_(sc), strategy_(strategy), opt_(opt) {
        const int n_fcs = sc_.net.num_fcs();
        fleet_.resize(sc_.cfg.ev.count);
        busy_.assign(sc_.cfg.ev.count, 0);
        request_seq_.assign(sc_.cfg.ev.count, -1);
        for (int j = 0; j < sc_.cfg.ev.count; ++j) {
            fleet_[j].id = j;
            fleet_[j].soc = 1.0;
            fleet_[j].capacity_kwh = sc_.cfg.ev.capacity_kwh;
            fleet_[j].speed_kmh = sc_.cfg.ev.speed_kmh;
            fleet_[j].position = sc_.ev_initial_node[j];
            fleet_[j].origin = sc_.ev_initial_node[j];
        }
        stations_.resize(n_fcs);
        pending_.resize(n_fcs);
        for (int i = 0; i < n_fcs; ++i) {
            stations_[i].total_piles = sc_.cfg.fcs.piles[i];
            stations_[i].available = sc_.cfg.fcs.piles[i];
            stations_[i].base_load_kw = sc_.cfg.fcs.base_load_kw;
            stations_[i].maint_per_kw = sc_.cfg.costs.fcs_maint_per_kw;
        }
        const int slots = sc_.steps_per_day();
        demand_history_.assign(n_fcs, std::vector<std::vector<double>>(slots));
        carry_prices_.assign(n_fcs, sc_.tou.empty() ? 0.0 : sc_.tou.front());
        hps_template_.wind = sc_.cfg.hps.wind;
        hps_template_.pv = sc_.cfg.hps.pv;
        hps_template_.chain = sc_.cfg.hps.chain;
        hps_template_.base_load_kw = sc_.cfg.hps.base_load_kw;
        hps_template_.maint_wind_per_kw = sc_.cfg.hps.maint_wind_per_kw;
        hps_template_.maint_pv_per_kw = sc_.cfg.hps.maint_pv_per_kw;
        hps_template_.delivery_per_kw = sc_.cfg.hps.delivery_per_kw;
    }

    int current_step() const { return step_; }
    bool done() const { return step_ >= sc_.cfg.sim.steps; }
    const std::vector<double>& carry_prices() const { return carry_prices_; }

    /// Snapshot of the decision problem at the current step. Also claims the
    /// step's scheduled requests, so call it exactly once per step.
    StepProblem begin_step() {
        claim_requests();
        return build_problem();
    }

    StepDecision solve(const StepProblem& problem, std::uint64_t run_seed) {
        if (strategy_ == Strategy::BiBbg) {
            OptimizeOptions o;
            o.epsilon = sc_.cfg.sim.epsilon;
            o.max_iterations = sc_.cfg.sim.max_iterations;
            o.random_init = opt_.random_init;
            o.init_seed = detail::hash_mix(run_seed, static_cast<std::uint64_t>(step_) + 0x51ab);
            o.warnings = warned_gamma_ ? nullptr : opt_.warnings;
            // the greedy schedules are valid initializations; feeding them in
            // keeps the solver at or below every baseline from the same state
            for (Strategy s : {Strategy::MinDistance, Strategy::MinPrice, Strategy::MinCost})
                o.seed_assignments.push_back(greedy_assignments(problem, s, carry_prices_));
            StepDecision d = optimize_step(problem, o);
            if (d.trace.gamma_below_bound) warned_gamma_ = true;
            return d;
        }
        return baseline_step(problem, strategy_, carry_prices_);
    }

    /// Book the step's costs, plug assigned EVs, and advance the world by
    /// one step. Returns the completed record.
    StepRecord apply_and_advance(const StepProblem& problem, const StepDecision& decision) {
        StepRecord rec;
        rec.step = step_;
        rec.cost = decision.cost;
        rec.requests = problem.num_requests();
        rec.trace = decision.trace;
        rec.iterations = decision.trace.rounds.empty() ? 1 : decision.trace.iterations();
        rec.converged = strategy_ != Strategy::BiBbg || decision.trace.converged;
        rec.decision_hash = detail::decision_hash(decision.assignments, decision.dispatch);

        // plug served requests, requeue or drop the rest
        for (int r = 0; r < problem.num_requests(); ++r) {
            const int ev = problem.requests[r].ev_id;
            const Assignment& a = decision.assignments[r];
            if (!a.served()) {
                if (sc_.cfg.sim.drop_unserved) {
                    fleet_[ev].requesting = false;
                    request_seq_[ev] = -1;
                }
                continue;
            }
            rec.served += 1;
            rec.deferred += a.deferred ? 1 : 0;
            unique_served_ += 1;
            fleet_[ev].requesting = false;
            request_seq_[ev] = -1;
            busy_[ev] = 1;

            Occupant occ;
            occ.ev_id = ev;
            const double travel_kwh =
                problem.requests[r].dist_to_fcs_km[a.fcs] * sc_.cfg.costs.loss_kwh_per_km;
            const double travel_soc = travel_kwh / fleet_[ev].capacity_kwh;
            epot_committed_kwh_ += problem.request_demand_kwh(r, a.fcs);
            clamp_correction_kwh_ +=
                std::max(0.0, travel_kwh - problem.requests[r].soc * fleet_[ev].capacity_kwh);
            occ.soc = std::max(0.0, problem.requests[r].soc - travel_soc);
            occ.power_kw = charging_power(problem.requests[r].loaded, sc_.cfg.costs.rates);
            occ.remaining_hours = remaining_time(occ.soc, fleet_[ev].capacity_kwh, occ.power_kw,
                                                 sc_.cfg.costs.charge_efficiency);
            occ.remaining_steps = std::max(
                1, static_cast<int>(
                       std::ceil(occ.remaining_hours / sc_.cfg.sim.delta_hours - 1e-9)));
            if (a.deferred) {
                pending_[a.fcs].push_back(occ);
            } else {
                if (stations_[a.fcs].available <= 0)
                    throw std::logic_error("engine: assignment to a station with no free pile");
                stations_[a.fcs].available -= 1;
                stations_[a.fcs].occupants.push_back(occ);
            }
        }

        advance_world(problem, decision);
        step_ += 1;
        return rec;
    }

    long request_events() const { return request_events_; }
    int unique_requests() const { return unique_requests_; }
    int unique_served() const { return unique_served_; }
    int skipped_no_vehicle() const { return skipped_; }

    // energy ledger for conservation checks
    double battery_kwh_delivered() const { return battery_kwh_delivered_; }
    double epot_committed_kwh() const { return epot_committed_kwh_; }
    double clamp_correction_kwh() const { return clamp_correction_kwh_; }
    double unfinished_kwh() const {
        double left = 0.0;
        for (const FcsState& st : stations_)
            for (const Occupant& o : st.occupants)
                left += (1.0 - o.soc) * fleet_[o.ev_id].capacity_kwh;
        for (const auto& queue : pending_)
            for (const Occupant& o : queue)
                left += (1.0 - o.soc) * fleet_[o.ev_id].capacity_kwh;
        return left;
    }

private:
    void claim_requests() {
        // retries keep their original arrival stamp; new requests claim the
        // lowest-index idle EV so the stream is stable across sweeps
        for (const RequestSpec& spec : sc_.request_schedule[step_]) {
            int ev = -1;
            for (int j = 0; j < static_cast<int>(fleet_.size()); ++j) {
                if (!busy_[j] && !fleet_[j].requesting) {
                    ev = j;
                    break;
                }
            }
            if (ev < 0) {
                skipped_ += 1;
                continue;
            }
            fleet_[ev].requesting = true;
            fleet_[ev].position = spec.node;
            fleet_[ev].soc = spec.soc;
            fleet_[ev].loaded = spec.loaded;
            fleet_[ev].destination = spec.destination;
            request_seq_[ev] = next_seq_++;
            unique_requests_ += 1;
        }
    }

    StepProblem build_problem() {
        StepProblem p;
        const int n_fcs = sc_.net.num_fcs();
        const int n_hps = sc_.net.num_hps();
        p.delta_hours = sc_.cfg.sim.delta_hours;
        p.tou_price = sc_.tou[step_];
        p.consts = sc_.cfg.costs;
        p.supply = sc_.supply;
        p.hps_fcs_dist_km = sc_.hps_fcs_dist;
        p.now_slots.resize(n_fcs);
        p.next_slots.resize(n_fcs);
        p.base_load_kw.assign(n_fcs, sc_.cfg.fcs.base_load_kw);
        const int slot = step_ % sc_.steps_per_day();
        p.demand_kwh.resize(n_fcs);
        for (int i = 0; i < n_fcs; ++i) {
            p.now_slots[i] = stations_[i].available;
            p.next_slots[i] = stations_[i].departing_count();
            p.demand_kwh[i] = ewma_demand(demand_history_[i][slot], sc_.cfg.fcs.demand_prior_kwh,
                                          sc_.cfg.fcs.ewma_window, sc_.cfg.fcs.ewma_decay);
        }
        p.hps.resize(n_hps);
        for (int k = 0; k < n_hps; ++k) {
            const HpsState& h = hps_template_;
            HpsView& v = p.hps[k];
            v.p_wind_kw = wind_power(sc_.wind_trace[k][step_], h.wind);
            v.p_pv_kw = pv_power(sc_.solar_trace[k][step_], h.pv);
            v.p_hydrogen_kw =
                hydrogen_power(sc_.wind_trace[k][step_], sc_.solar_trace[k][step_], h);
            v.maint_wind_per_kw = h.maint_wind_per_kw;
            v.maint_pv_per_kw = h.maint_pv_per_kw;
            v.delivery_per_kw = h.delivery_per_kw;
        }

        // requesting EVs in arrival order
        std::vector<int> ids;
        for (int j = 0; j < static_cast<int>(fleet_.size()); ++j)
            if (fleet_[j].requesting) ids.push_back(j);
        std::sort(ids.begin(), ids.end(),
                  [&](int a, int b) { return request_seq_[a] < request_seq_[b]; });
        request_events_ += static_cast<long>(ids.size());
        for (int ev : ids) {
            RequestView rv;
            rv.ev_id = ev;
            rv.soc = fleet_[ev].soc;
            rv.capacity_kwh = fleet_[ev].capacity_kwh;
            rv.loaded = fleet_[ev].loaded;
            rv.speed_kmh = fleet_[ev].speed_kmh;
            rv.origin_leg_km = sc_.net.shortest_distance(fleet_[ev].origin, fleet_[ev].position);
            rv.dist_to_fcs_km.resize(n_fcs);
            rv.fcs_to_dest_km.assign(n_fcs, 0.0);
            rv.reachable.resize(n_fcs);
            const double radius = rv.speed_kmh * sc_.cfg.sim.delta_hours;
            for (int i = 0; i < n_fcs; ++i) {
                rv.dist_to_fcs_km[i] = sc_.net.distance_to_fcs(fleet_[ev].position, i);
                rv.reachable[i] = rv.dist_to_fcs_km[i] <= radius ? 1 : 0;
                if (rv.loaded)
                    rv.fcs_to_dest_km[i] =
                        sc_.net.shortest_distance(sc_.net.fcs_nodes()[i], fleet_[ev].destination);
            }
            p.requests.push_back(std::move(rv));
        }
        return p;
    }

    void advance_world(const StepProblem& problem, const StepDecision& decision) {
        const int n_fcs = sc_.net.num_fcs();
        const int slot = step_ % sc_.steps_per_day();
        const std::vector<double> prices = station_prices(problem, decision.dispatch);
        for (int i = 0; i < n_fcs; ++i) {
            FcsState& st = stations_[i];
            double realized_kwh = 0.0;
            std::vector<Occupant> survivors;
            for (Occupant occ : st.occupants) {
                realized_kwh += occ.power_kw * sc_.cfg.sim.delta_hours;
                const double soc_before = occ.soc;
                occ.soc = soc_step(occ.soc, occ.power_kw, sc_.cfg.costs.charge_efficiency,
                                   sc_.cfg.sim.delta_hours, fleet_[occ.ev_id].capacity_kwh);
                battery_kwh_delivered_ +=
                    (occ.soc - soc_before) * fleet_[occ.ev_id].capacity_kwh;
                occ.remaining_hours = std::max(0.0, occ.remaining_hours - sc_.cfg.sim.delta_hours);
                occ.remaining_steps -= 1;
                if (occ.remaining_steps <= 0) {
                    EvState& ev = fleet_[occ.ev_id];
                    const int fcs_node = sc_.net.fcs_nodes()[i];
                    ev.soc = occ.soc;
                    ev.position = ev.loaded ? ev.destination : fcs_node;
                    ev.origin = fcs_node;
                    ev.loaded = false;
                    ev.destination = -1;
                    busy_[occ.ev_id] = 0;
                    st.available += 1;
                } else {
                    survivors.push_back(occ);
                }
            }
            st.occupants = std::move(survivors);
            for (const Occupant& occ : pending_[i]) {
                if (st.available <= 0)
                    throw std::logic_error("engine: deferred arrival found no freed pile");
                st.available -= 1;
                st.occupants.push_back(occ);
            }
            pending_[i].clear();
            st.validate();
            st.demand_estimate_kwh = problem.demand_kwh[i];
            st.price = prices[i];
            demand_history_[i][slot].push_back(realized_kwh);
        }
        carry_prices_ = prices;
    }

    const Scenario& sc_;
    Strategy strategy_;
    EngineOptions opt_;
    int step_ = 0;
    std::vector<EvState> fleet_;
    std::vector<char> busy_;
    std::vector<int> request_seq_;
    std::vector<FcsState> stations_;
    std::vector<std::vector<Occupant>> pending_;
    std::vector<std::vector<std::vector<double>>> demand_history_;  // [fcs][slot][day]
    std::vector<double> carry_prices_;
    HpsState hps_template_;
    long request_events_ = 0;
    int unique_requests_ = 0;
    int unique_served_ = 0;
    int skipped_ = 0;
    int next_seq_ = 0;
    bool warned_gamma_ = false;
    double battery_kwh_delivered_ = 0.0;
    double epot_committed_kwh_ = 0.0;
    double clamp_correction_kwh_ = 0.0;
};

/// Run one full horizon under one strategy. Deterministic in (scenario, seed).
inline RunReport run_horizon(const Scenario& sc, Strategy strategy, std::uint64_t seed,
                             EngineOptions opt = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    HorizonEngine engine(sc, strategy, opt);
    RunReport report;
    report.strategy = to_string(strategy);
    report.seed = seed;
    double iter_sum = 0.0;
    while (!engine.done()) {
        const StepProblem problem = engine.begin_step();
        const StepDecision decision = engine.solve(problem, seed);
        StepRecord rec = engine.apply_and_advance(problem, decision);
        report.totals += rec.cost;
        iter_sum += rec.iterations;
        report.all_converged = report.all_converged && rec.converged;
        report.steps.push_back(std::move(rec));
    }
    report.request_events = engine.request_events();
    report.unique_requests = engine.unique_requests();
    report.unique_served = engine.unique_served();
    report.skipped_no_vehicle = engine.skipped_no_vehicle();
    report.service_rate =
        report.unique_requests == 0
            ? 1.0
            : static_cast<double>(report.unique_served) / report.unique_requests;
    report.mean_iterations = report.steps.empty() ? 0.0 : iter_sum / report.steps.size();
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

/// Per-step costs of every strategy evaluated from the same frozen state;
/// the world itself advances under the bi-level strategy.
struct FrozenComparison {
    std::vector<std::string> strategies;
    std::vector<std::vector<double>> step_costs;  // [step][strategy]
};

inline FrozenComparison run_frozen_comparison(const Scenario& sc, std::uint64_t seed,
                                              EngineOptions opt = {}) {
    FrozenComparison cmp;
    for (Strategy s : all_strategies()) cmp.strategies.push_back(to_string(s));
    HorizonEngine bi(sc, Strategy::BiBbg, opt);
    while (!bi.done()) {
        const StepProblem problem = bi.begin_step();
        std::vector<double> costs;
        StepDecision bi_decision;
        for (Strategy s : all_strategies()) {
            if (s == Strategy::BiBbg) {
                bi_decision = bi.solve(problem, seed);
                costs.push_back(bi_decision.cost.total);
            } else {
                costs.push_back(baseline_step(problem, s, bi.carry_prices()).cost.total);
            }
        }
        cmp.step_costs.push_back(std::move(costs));
        bi.apply_and_advance(problem, bi_decision);
    }
    return cmp;
}

} // namespace hycharge
