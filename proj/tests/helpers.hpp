#pragma once

#include <vector>

#include "hycharge/step.hpp"

namespace hycharge::test {

inline StepProblem make_problem(int n_fcs, int n_hps, int now_slots_each = 1) {
    StepProblem p;
    p.delta_hours = 0.25;
    p.tou_price = 1.0;
    p.now_slots.assign(n_fcs, now_slots_each);
    p.next_slots.assign(n_fcs, 0);
    p.base_load_kw.assign(n_fcs, 200.0);
    p.demand_kwh.assign(n_fcs, 100.0);
    p.hps.resize(n_hps);
    p.supply = Matrix<std::uint8_t>(n_hps, n_fcs, 1);
    p.hps_fcs_dist_km = Matrix<double>(n_hps, n_fcs, 5.0);
    return p;
}

inline RequestView make_request(int ev_id, double soc, bool loaded,
                                std::vector<double> dist_to_fcs,
                                std::vector<double> fcs_to_dest = {}, double origin_leg = 0.0,
                                double speed = 60.0) {
    RequestView r;
    r.ev_id = ev_id;
    r.soc = soc;
    r.capacity_kwh = 75.0;
    r.loaded = loaded;
    r.speed_kmh = speed;
    r.origin_leg_km = origin_leg;
    r.dist_to_fcs_km = dist_to_fcs;
    r.fcs_to_dest_km =
        fcs_to_dest.empty() ? std::vector<double>(dist_to_fcs.size(), 0.0) : fcs_to_dest;
    r.reachable.assign(dist_to_fcs.size(), 1);
    for (std::size_t i = 0; i < dist_to_fcs.size(); ++i)
        r.reachable[i] = dist_to_fcs[i] <= speed * 0.25 ? 1 : 0;
    return r;
}

} // namespace hycharge::test
