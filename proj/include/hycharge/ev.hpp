#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hycharge/network.hpp"
#include "hycharge/station.hpp"

namespace hycharge {

struct CostConstants {
    double wait_per_hour = 17.2;        // CNY/h, EVs with passengers
    double idle_per_hour = 21.0;        // CNY/h, vacant EVs off duty while charging
    double depreciation_per_km = 0.025; // CNY/km
    double fcs_maint_per_kw = 0.018;    // CNY/kW
    double loss_kwh_per_km = 0.014;     // traction consumption
    double charge_efficiency = 0.92;
    double gamma = 300.0;               // CNY per unserved request per step
    ChargingRates rates;

    void validate() const {
        if (wait_per_hour < 0.0 || idle_per_hour < 0.0 || depreciation_per_km < 0.0 ||
            fcs_maint_per_kw < 0.0 || loss_kwh_per_km < 0.0 || gamma < 0.0)
            throw std::invalid_argument("costs: unit costs must be nonnegative");
        if (charge_efficiency <= 0.0 || charge_efficiency > 1.0)
            throw std::invalid_argument("costs: charge efficiency must be in (0,1]");
        rates.validate();
    }
};

struct EvState {
    int id = -1;
    double soc = 1.0;
    double capacity_kwh = 75.0;
    bool loaded = false;          // passengers on board
    int position = 0;             // node where the charging request was made
    int origin = 0;               // node of the last completed recharge
    int destination = -1;         // passenger destination, only when loaded
    bool requesting = false;
    double speed_kmh = 60.0;

    void validate() const {
        if (soc < 0.0 || soc > 1.0) throw std::invalid_argument("ev: soc out of [0,1]");
        if (capacity_kwh <= 0.0) throw std::invalid_argument("ev: capacity must be positive");
        if (speed_kmh <= 0.0) throw std::invalid_argument("ev: speed must be positive");
        if (loaded && destination < 0)
            throw std::invalid_argument("ev: loaded EV needs a destination");
    }
};

/// Energy a request will draw: residual battery need plus the consumption of
/// driving to the station.
inline double potential_demand(double soc, double capacity_kwh, double dist_to_fcs_km,
                               double loss_kwh_per_km) {
    if (dist_to_fcs_km < 0.0)
        throw std::invalid_argument("potential_demand: distance must be nonnegative");
    return (1.0 - soc) * capacity_kwh + loss_kwh_per_km * dist_to_fcs_km;
}

struct CostTerms {
    double charge = 0.0;
    double wait = 0.0;
    double idle = 0.0;
    double depreciation = 0.0;

    double total() const { return charge + wait + idle + depreciation; }
};

/// Per-EV cost of charging at one candidate station, term by term.
/// `dist_to_fcs` is the detour to the station, `fcs_to_dest` the onward leg
/// (ignored for vacant EVs), `origin_leg` the request's fixed prior mileage.
inline CostTerms assignment_cost_terms(double soc, double capacity_kwh, bool loaded,
                                       double speed_kmh, double dist_to_fcs_km,
                                       double fcs_to_dest_km, double origin_leg_km,
                                       double price, const CostConstants& k) {
    const double e_pot = potential_demand(soc, capacity_kwh, dist_to_fcs_km, k.loss_kwh_per_km);
    const double power = charging_power(loaded, k.rates);
    const double charge_hours = e_pot / (power * k.charge_efficiency);
    CostTerms t;
    t.charge = e_pot * price;
    if (loaded) {
        t.wait = k.wait_per_hour * ((dist_to_fcs_km + fcs_to_dest_km) / speed_kmh + charge_hours);
        t.depreciation = k.depreciation_per_km * (origin_leg_km + dist_to_fcs_km + fcs_to_dest_km);
    } else {
        t.idle = k.idle_per_hour * charge_hours;
        t.depreciation = k.depreciation_per_km * (origin_leg_km + dist_to_fcs_km);
    }
    return t;
}

/// Same cost, resolved against the road network and a posted price vector.
inline double ev_assignment_cost(const EvState& ev, int fcs_index,
                                 const std::vector<double>& prices, const RoadNetwork& net,
                                 double origin_leg_km, const CostConstants& k) {
    if (!ev.requesting) throw std::invalid_argument("assignment cost: EV is not requesting");
    const double dist = net.distance_to_fcs(ev.position, fcs_index);
    const double onward = ev.loaded ? net.shortest_distance(net.fcs_nodes().at(fcs_index),
                                                            ev.destination)
                                    : 0.0;
    return assignment_cost_terms(ev.soc, ev.capacity_kwh, ev.loaded, ev.speed_kmh, dist, onward,
                                 origin_leg_km, prices.at(fcs_index), k)
        .total();
}

/// Step cost split by line item; `total` is always the sum of the parts.
struct CostBreakdown {
    double charge = 0.0;
    double wait = 0.0;
    double idle = 0.0;
    double depreciation = 0.0;
    double fcs_maint = 0.0;
    double hps_maint = 0.0;
    double delivery = 0.0;
    double penalty = 0.0;
    double total = 0.0;
    int unserved = 0;

    CostBreakdown& operator+=(const CostBreakdown& o) {
        charge += o.charge;
        wait += o.wait;
        idle += o.idle;
        depreciation += o.depreciation;
        fcs_maint += o.fcs_maint;
        hps_maint += o.hps_maint;
        delivery += o.delivery;
        penalty += o.penalty;
        total += o.total;
        unserved += o.unserved;
        return *this;
    }

    // Split by decision variable: dispatch-only, coupling, assignment-only.
    double dispatch_part() const { return hps_maint + delivery; }
    double coupling_part() const { return charge; }
    double assignment_part() const { return wait + idle + depreciation + fcs_maint + penalty; }
};

} // namespace hycharge
