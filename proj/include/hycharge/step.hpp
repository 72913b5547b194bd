#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "hycharge/ev.hpp"
#include "hycharge/matrix.hpp"
#include "hycharge/renewables.hpp"
#include "hycharge/station.hpp"

namespace hycharge {

/// One charging request as the per-step solvers see it: EV state plus all
/// distances resolved against the road network.
struct RequestView {
    int ev_id = -1;
    double soc = 0.5;
    double capacity_kwh = 75.0;
    bool loaded = false;
    double speed_kmh = 60.0;
    double origin_leg_km = 0.0;           // request node back to the last-recharge node
    std::vector<double> dist_to_fcs_km;   // per station
    std::vector<double> fcs_to_dest_km;   // per station, zero when vacant
    std::vector<std::uint8_t> reachable;  // per station
};

struct HpsView {
    double p_hydrogen_kw = 0.0;
    double p_wind_kw = 0.0;
    double p_pv_kw = 0.0;
    double maint_wind_per_kw = 0.018;
    double maint_pv_per_kw = 0.018;
    double delivery_per_kw = 0.04;
};

/// Immutable snapshot of one decision step: requests, station capacities,
/// plant supplies, and the tariff. Both solver levels and the brute-force
/// verifiers work from this one structure.
struct StepProblem {
    double delta_hours = 0.25;
    double tou_price = 1.0;
    CostConstants consts;
    std::vector<RequestView> requests;       // in arrival order
    std::vector<int> now_slots;              // free piles per station
    std::vector<int> next_slots;             // piles freed by next-step departures
    std::vector<double> base_load_kw;        // per station
    std::vector<double> demand_kwh;          // per station, estimated
    std::vector<HpsView> hps;
    Matrix<std::uint8_t> supply;             // plants x stations
    Matrix<double> hps_fcs_dist_km;          // plants x stations

    int num_fcs() const { return static_cast<int>(now_slots.size()); }
    int num_hps() const { return static_cast<int>(hps.size()); }
    int num_requests() const { return static_cast<int>(requests.size()); }
    int total_slots() const {
        return std::accumulate(now_slots.begin(), now_slots.end(), 0) +
               std::accumulate(next_slots.begin(), next_slots.end(), 0);
    }

    double request_demand_kwh(int r, int i) const {
        const RequestView& rv = requests[r];
        return potential_demand(rv.soc, rv.capacity_kwh, rv.dist_to_fcs_km[i],
                                consts.loss_kwh_per_km);
    }

    CostTerms request_cost_terms(int r, int i, double price) const {
        const RequestView& rv = requests[r];
        return assignment_cost_terms(rv.soc, rv.capacity_kwh, rv.loaded, rv.speed_kmh,
                                     rv.dist_to_fcs_km[i], rv.fcs_to_dest_km[i],
                                     rv.origin_leg_km, price, consts);
    }
};

/// Where one request goes this step: a station now, a station one step later
/// (freed pile), or nowhere.
struct Assignment {
    int fcs = -1;          // -1 = unserved
    bool deferred = false; // true = waits one step for a freed pile

    bool served() const { return fcs >= 0; }
    bool operator==(const Assignment&) const = default;
};

inline Matrix<double> zero_dispatch(const StepProblem& p) {
    return Matrix<double>(p.num_hps(), p.num_fcs(), 0.0);
}

/// Posted per-station prices implied by a dispatch matrix.
inline std::vector<double> station_prices(const StepProblem& p, const Matrix<double>& dispatch) {
    std::vector<double> prices(p.num_fcs());
    for (int i = 0; i < p.num_fcs(); ++i)
        prices[i] = charging_price(p.base_load_kw[i], p.demand_kwh[i], dispatch.col_sum(i),
                                   p.tou_price);
    return prices;
}

namespace detail {
constexpr double kDispatchTolKw = 1e-9;

inline void check_assignments(const StepProblem& p, const std::vector<Assignment>& assign) {
    if (static_cast<int>(assign.size()) != p.num_requests())
        throw std::invalid_argument("step objective: one assignment entry per request required");
    std::vector<int> now_used(p.num_fcs(), 0), next_used(p.num_fcs(), 0);
    for (int r = 0; r < p.num_requests(); ++r) {
        const Assignment& a = assign[r];
        if (!a.served()) continue;
        if (a.fcs >= p.num_fcs())
            throw std::invalid_argument("step objective: assignment to unknown station");
        if (!p.requests[r].reachable[a.fcs])
            throw std::invalid_argument("step objective: EV assigned to unreachable station");
        (a.deferred ? next_used : now_used)[a.fcs] += 1;
    }
    for (int i = 0; i < p.num_fcs(); ++i) {
        if (now_used[i] > p.now_slots[i])
            throw std::invalid_argument("step objective: assignments exceed free piles");
        if (next_used[i] > p.next_slots[i])
            throw std::invalid_argument("step objective: deferrals exceed next-step departures");
    }
}

inline void check_dispatch(const StepProblem& p, const Matrix<double>& dispatch) {
    if (dispatch.rows() != static_cast<std::size_t>(p.num_hps()) ||
        dispatch.cols() != static_cast<std::size_t>(p.num_fcs()))
        throw std::invalid_argument("step objective: dispatch matrix has wrong shape");
    for (int k = 0; k < p.num_hps(); ++k) {
        double row = 0.0;
        for (int i = 0; i < p.num_fcs(); ++i) {
            const double h = dispatch(k, i);
            if (h < -kDispatchTolKw)
                throw std::invalid_argument("step objective: negative dispatched power");
            if (!p.supply(k, i) && h > kDispatchTolKw)
                throw std::invalid_argument("step objective: dispatch to an unreachable station");
            row += h;
        }
        if (row > p.hps[k].p_hydrogen_kw + kDispatchTolKw)
            throw std::invalid_argument("step objective: dispatch exceeds hydrogen power");
    }
}
} // namespace detail

/// Full step cost of a candidate decision. Validates the structural
/// constraints first and refuses infeasible input. Deferred assignments book
/// their one-step wait here, so this is exactly the quantity both solver
/// levels drive down.
inline CostBreakdown step_objective(const StepProblem& p, const std::vector<Assignment>& assign,
                                    const Matrix<double>& dispatch) {
    detail::check_assignments(p, assign);
    detail::check_dispatch(p, dispatch);

    const std::vector<double> prices = station_prices(p, dispatch);
    CostBreakdown out;
    for (int r = 0; r < p.num_requests(); ++r) {
        const Assignment& a = assign[r];
        if (!a.served()) {
            out.unserved += 1;
            continue;
        }
        const CostTerms t = p.request_cost_terms(r, a.fcs, prices[a.fcs]);
        out.charge += t.charge;
        out.wait += t.wait;
        out.idle += t.idle;
        out.depreciation += t.depreciation;
        out.fcs_maint += p.consts.fcs_maint_per_kw *
                         charging_power(p.requests[r].loaded, p.consts.rates);
        if (a.deferred) out.wait += p.consts.wait_per_hour * p.delta_hours;
    }
    out.penalty = out.unserved * p.consts.gamma;
    for (int k = 0; k < p.num_hps(); ++k) {
        out.hps_maint += p.hps[k].maint_wind_per_kw * p.hps[k].p_wind_kw +
                         p.hps[k].maint_pv_per_kw * p.hps[k].p_pv_kw;
        out.delivery += p.hps[k].delivery_per_kw * dispatch.row_sum(k);
    }
    out.total = out.charge + out.wait + out.idle + out.depreciation + out.fcs_maint +
                out.hps_maint + out.delivery + out.penalty;
    return out;
}

/// Assignment matrix form (stations x requests) for invariant checks.
inline Matrix<std::uint8_t> assignment_matrix(const StepProblem& p,
                                              const std::vector<Assignment>& assign) {
    Matrix<std::uint8_t> g(p.num_fcs(), p.num_requests(), 0);
    for (int r = 0; r < p.num_requests(); ++r)
        if (assign[r].served()) g(assign[r].fcs, r) = 1;
    return g;
}

} // namespace hycharge
