#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "hycharge/simplex.hpp"
#include "hycharge/step.hpp"

namespace hycharge {

/// The upper-level dispatch problem for a fixed assignment. Variables are
/// the deliverable dispatch amounts plus one epigraph variable per station
/// for the clamped price ratio; the charge cost is linear in those ratios,
/// so the LP optimum is exact.
struct DispatchLp {
    LinearProgram lp;
    std::vector<std::pair<int, int>> h_vars;  // variable -> (plant, station)
    int ratio_var_start = 0;                  // first price-ratio variable
    std::vector<double> station_demand_kwh;   // energy each station must sell
    double constant_cost = 0.0;               // assignment-side cost, fixed here
};

inline DispatchLp build_lp(const StepProblem& p, const std::vector<Assignment>& assign) {
    DispatchLp d;
    d.station_demand_kwh.assign(p.num_fcs(), 0.0);
    CostBreakdown fixed;
    for (int r = 0; r < p.num_requests(); ++r) {
        const Assignment& a = assign[r];
        if (!a.served()) {
            fixed.penalty += p.consts.gamma;
            continue;
        }
        d.station_demand_kwh[a.fcs] += p.request_demand_kwh(r, a.fcs);
        const CostTerms t = p.request_cost_terms(r, a.fcs, 0.0);
        fixed.wait += t.wait + (a.deferred ? p.consts.wait_per_hour * p.delta_hours : 0.0);
        fixed.idle += t.idle;
        fixed.depreciation += t.depreciation;
        fixed.fcs_maint += p.consts.fcs_maint_per_kw *
                           charging_power(p.requests[r].loaded, p.consts.rates);
    }
    for (int k = 0; k < p.num_hps(); ++k)
        fixed.hps_maint += p.hps[k].maint_wind_per_kw * p.hps[k].p_wind_kw +
                           p.hps[k].maint_pv_per_kw * p.hps[k].p_pv_kw;
    d.constant_cost = fixed.wait + fixed.idle + fixed.depreciation + fixed.fcs_maint +
                      fixed.penalty + fixed.hps_maint;
    d.lp.cost_constant = d.constant_cost;

    for (int k = 0; k < p.num_hps(); ++k) {
        for (int i = 0; i < p.num_fcs(); ++i) {
            if (!p.supply(k, i)) continue;
            d.h_vars.emplace_back(k, i);
            d.lp.add_var(p.hps[k].delivery_per_kw,
                         "h_" + std::to_string(k) + "_" + std::to_string(i));
        }
    }
    d.ratio_var_start = d.lp.num_vars;
    for (int i = 0; i < p.num_fcs(); ++i)
        d.lp.add_var(d.station_demand_kwh[i] * p.tou_price, "ratio_" + std::to_string(i));

    // supply caps: each plant ships at most its hydrogen power
    for (int k = 0; k < p.num_hps(); ++k) {
        LinearProgram::Row row;
        for (std::size_t v = 0; v < d.h_vars.size(); ++v)
            if (d.h_vars[v].first == k) row.terms.emplace_back(static_cast<int>(v), 1.0);
        row.rel = LinearProgram::Rel::LessEq;
        row.rhs = p.hps[k].p_hydrogen_kw;
        d.lp.rows.push_back(std::move(row));
    }
    // price epigraph: ratio_i >= (B_i - h_i) / B_i, ratio_i >= 0 is implicit
    for (int i = 0; i < p.num_fcs(); ++i) {
        const double denom = p.base_load_kw[i] + p.demand_kwh[i];
        if (denom <= 0.0)
            throw std::invalid_argument("dispatch: station base load plus demand must be positive");
        LinearProgram::Row row;
        row.terms.emplace_back(d.ratio_var_start + i, denom);
        for (std::size_t v = 0; v < d.h_vars.size(); ++v)
            if (d.h_vars[v].second == i) row.terms.emplace_back(static_cast<int>(v), 1.0);
        row.rel = LinearProgram::Rel::GreaterEq;
        row.rhs = denom;
        d.lp.rows.push_back(std::move(row));
    }
    return d;
}

struct DispatchResult {
    Matrix<double> dispatch;          // plants x stations, kW
    double objective = 0.0;           // full step cost at the optimum
    std::vector<double> price_ratio;  // epigraph values at the optimum
    bool optimal = false;
};

inline DispatchResult solve_lp(const DispatchLp& d, const StepProblem& p) {
    const LpSolution sol = simplex_solve(d.lp);
    if (sol.status != LpStatus::Optimal)
        throw std::logic_error("dispatch: LP must be solvable (zero dispatch is feasible)");
    DispatchResult res;
    res.optimal = true;
    res.dispatch = zero_dispatch(p);
    for (std::size_t v = 0; v < d.h_vars.size(); ++v) {
        const auto [k, i] = d.h_vars[v];
        res.dispatch(k, i) = std::max(0.0, sol.x[v]);
    }
    // trim solver dust so row sums respect the supply cap exactly
    for (int k = 0; k < p.num_hps(); ++k) {
        const double cap = p.hps[k].p_hydrogen_kw;
        double row = res.dispatch.row_sum(k);
        if (row > cap + 1e-6)
            throw std::logic_error("dispatch: solution violates a supply cap beyond tolerance");
        if (row > cap) {
            for (int i = 0; i < p.num_fcs() && row > cap; ++i) {
                const double cut = std::min(res.dispatch(k, i), row - cap);
                res.dispatch(k, i) -= cut;
                row -= cut;
            }
        }
    }
    res.price_ratio.assign(p.num_fcs(), 0.0);
    for (int i = 0; i < p.num_fcs(); ++i) res.price_ratio[i] = sol.x[d.ratio_var_start + i];
    res.objective = sol.objective;
    return res;
}

/// Fixed-assignment optimal dispatch in one call.
inline DispatchResult optimal_dispatch(const StepProblem& p,
                                       const std::vector<Assignment>& assign) {
    return solve_lp(build_lp(p, assign), p);
}

/// Everything to the nearest reachable station, per plant.
inline Matrix<double> concentrate_dispatch(const StepProblem& p) {
    Matrix<double> h = zero_dispatch(p);
    for (int k = 0; k < p.num_hps(); ++k) {
        int best = -1;
        for (int i = 0; i < p.num_fcs(); ++i) {
            if (!p.supply(k, i)) continue;
            if (best < 0 || p.hps_fcs_dist_km(k, i) < p.hps_fcs_dist_km(k, best)) best = i;
        }
        if (best >= 0) h(k, best) = p.hps[k].p_hydrogen_kw;
    }
    return h;
}

/// Equal split over all reachable stations, per plant.
inline Matrix<double> spread_dispatch(const StepProblem& p) {
    Matrix<double> h = zero_dispatch(p);
    for (int k = 0; k < p.num_hps(); ++k) {
        std::vector<int> reach;
        for (int i = 0; i < p.num_fcs(); ++i)
            if (p.supply(k, i)) reach.push_back(i);
        for (int i : reach) h(k, i) = p.hps[k].p_hydrogen_kw / static_cast<double>(reach.size());
    }
    return h;
}

/// Fill stations toward free charging in the given priority order, cheapest
/// delivery first, each up to its base-plus-demand level.
inline Matrix<double> saturate_stations_dispatch(const StepProblem& p,
                                                 const std::vector<int>& priority) {
    Matrix<double> h = zero_dispatch(p);
    std::vector<double> spare(p.num_hps());
    for (int k = 0; k < p.num_hps(); ++k) spare[k] = p.hps[k].p_hydrogen_kw;
    for (int station : priority) {
        double need = p.base_load_kw[station] + p.demand_kwh[station];
        std::vector<int> plants;
        for (int k = 0; k < p.num_hps(); ++k)
            if (p.supply(k, station) && spare[k] > 0.0) plants.push_back(k);
        std::sort(plants.begin(), plants.end(), [&](int a, int b) {
            if (p.hps[a].delivery_per_kw != p.hps[b].delivery_per_kw)
                return p.hps[a].delivery_per_kw < p.hps[b].delivery_per_kw;
            return a < b;
        });
        for (int k : plants) {
            const double ship = std::min(need, spare[k]);
            h(k, station) += ship;
            spare[k] -= ship;
            need -= ship;
            if (need <= 0.0) break;
        }
    }
    return h;
}

inline Matrix<double> saturate_station_dispatch(const StepProblem& p, int station) {
    return saturate_stations_dispatch(p, {station});
}

} // namespace hycharge
