#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hycharge {

struct ChargingRates {
    double noload_kw = 44.0;  // vacant EVs
    double loaded_kw = 88.0;  // EVs with passengers

    void validate() const {
        if (noload_kw <= 0.0 || loaded_kw <= noload_kw)
            throw std::invalid_argument("rates: loaded power must exceed no-load power (> 0)");
    }
};

/// Charging power by service state: passengers on board get the higher rate.
inline double charging_power(bool loaded, const ChargingRates& r) {
    return loaded ? r.loaded_kw : r.noload_kw;
}

/// One step of SoC dynamics, clamped at a full battery.
inline double soc_step(double soc, double power_kw, double eta, double delta_hours,
                       double capacity_kwh) {
    if (capacity_kwh <= 0.0) throw std::invalid_argument("soc_step: capacity must be positive");
    if (power_kw < 0.0) throw std::invalid_argument("soc_step: power must be nonnegative");
    return std::min(1.0, soc + power_kw * eta * delta_hours / capacity_kwh);
}

/// Hours until the battery is full at the given rate.
inline double remaining_time(double soc, double capacity_kwh, double power_kw, double eta) {
    if (power_kw <= 0.0) throw std::invalid_argument("remaining_time: power must be positive");
    return (1.0 - soc) * capacity_kwh / (power_kw * eta);
}

struct Occupant {
    int ev_id = -1;
    double soc = 0.0;
    double power_kw = 0.0;
    double remaining_hours = 0.0;
    int remaining_steps = 0;  // whole steps of pile occupancy left
};

/// One fast-charging station. `available` tracks free piles; the occupant
/// list holds currently plugged EVs. Departure happens on the first step
/// boundary where the occupancy countdown reaches zero.
struct FcsState {
    int total_piles = 20;
    int available = 20;
    std::vector<Occupant> occupants;
    double base_load_kw = 200.0;
    double demand_estimate_kwh = 100.0;
    double price = 0.0;            // CNY/kWh, refreshed each step
    double maint_per_kw = 0.018;   // CNY/kW

    void validate() const {
        if (total_piles <= 0) throw std::invalid_argument("fcs: pile count must be positive");
        if (available < 0 || available > total_piles)
            throw std::invalid_argument("fcs: available piles out of range");
        if (static_cast<int>(occupants.size()) != total_piles - available)
            throw std::invalid_argument("fcs: occupant count inconsistent with free piles");
        for (const Occupant& o : occupants)
            if (o.soc < 0.0 || o.soc > 1.0 || o.remaining_steps < 0 || o.remaining_hours < 0.0)
                throw std::invalid_argument("fcs: occupant state out of range");
    }

    /// EVs that unplug at the next step boundary.
    int departing_count() const {
        int n = 0;
        for (const Occupant& o : occupants) n += o.remaining_steps == 1 ? 1 : 0;
        return n;
    }
};

/// Advance the pile ledger by one step: next-step departures leave, the
/// step's assigned arrivals take their piles. Arrivals beyond the free piles
/// plus the departures indicate a matcher bug and are rejected.
inline FcsState pile_update(const FcsState& fcs, const std::vector<Occupant>& arrivals) {
    const int departing = fcs.departing_count();
    if (static_cast<int>(arrivals.size()) > fcs.available + departing)
        throw std::invalid_argument("pile_update: arrivals exceed free piles plus departures");
    FcsState next = fcs;
    next.available = fcs.available - static_cast<int>(arrivals.size()) + departing;
    next.occupants.clear();
    for (const Occupant& o : fcs.occupants)
        if (o.remaining_steps != 1) next.occupants.push_back(o);
    for (const Occupant& o : arrivals) next.occupants.push_back(o);
    next.validate();
    return next;
}

/// Posted charging price: the grid tariff scaled by the share of station
/// load not covered by dispatched hydrogen, floored at zero. The kW base
/// load and the kWh demand estimate enter as per-step magnitudes.
inline double charging_price(double base_load_kw, double demand_kwh, double hydrogen_total_kw,
                             double tou_price) {
    const double denom = base_load_kw + demand_kwh;
    if (denom <= 0.0)
        throw std::invalid_argument("charging_price: base load plus demand must be positive");
    if (hydrogen_total_kw < 0.0)
        throw std::invalid_argument("charging_price: hydrogen must be nonnegative");
    return std::max((denom - hydrogen_total_kw) / denom, 0.0) * tou_price;
}

/// Pile maintenance: proportional to the power of the EVs assigned this step.
inline double fcs_maintenance(const std::vector<double>& assigned_powers_kw, double maint_per_kw) {
    double total = 0.0;
    for (double p : assigned_powers_kw) {
        if (p < 0.0) throw std::invalid_argument("fcs_maintenance: power must be nonnegative");
        total += p;
    }
    return maint_per_kw * total;
}

} // namespace hycharge
