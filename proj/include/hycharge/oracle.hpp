#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hycharge/bilevel.hpp"
#include "hycharge/dispatch.hpp"
#include "hycharge/matching.hpp"
#include "hycharge/network.hpp"
#include "hycharge/step.hpp"

namespace hycharge {

/// A step problem small enough to verify by exhaustive enumeration.
struct SmallInstance {
    StepProblem problem;
    std::size_t enumeration_budget = 1'000'000;
};

struct JointOptimum {
    double j = 0.0;
    std::vector<Assignment> assignments;
    Matrix<double> dispatch;
    std::size_t enumerated = 0;
};

namespace detail {

// All feasible assignment vectors: each request goes unserved, to a free
// pile, or to a next-step pile, within per-station capacities.
template <typename Fn>
void for_each_assignment(const StepProblem& p, std::size_t budget, Fn&& fn) {
    std::vector<Assignment> assign(p.num_requests());
    std::vector<int> now_left = p.now_slots, next_left = p.next_slots;
    std::size_t visited = 0;
    auto rec = [&](auto&& self, int r) -> void {
        if (r == p.num_requests()) {
            if (++visited > budget)
                throw std::runtime_error("oracle: enumeration budget exceeded");
            fn(const_cast<const std::vector<Assignment>&>(assign));
            return;
        }
        assign[r] = Assignment{};
        self(self, r + 1);
        for (int i = 0; i < p.num_fcs(); ++i) {
            if (!p.requests[r].reachable[i]) continue;
            if (now_left[i] > 0) {
                now_left[i] -= 1;
                assign[r] = {i, false};
                self(self, r + 1);
                now_left[i] += 1;
            }
            if (next_left[i] > 0) {
                next_left[i] -= 1;
                assign[r] = {i, true};
                self(self, r + 1);
                next_left[i] += 1;
            }
        }
        assign[r] = Assignment{};
    };
    rec(rec, 0);
}

} // namespace detail

/// Exhaustive joint optimum: every feasible assignment, each scored at its
/// exact optimal dispatch. The reference the iterative solver must match.
inline JointOptimum enumerate_joint_optimum(const SmallInstance& inst) {
    const StepProblem& p = inst.problem;
    JointOptimum best;
    best.j = std::numeric_limits<double>::infinity();
    std::size_t count = 0;
    detail::for_each_assignment(p, inst.enumeration_budget,
                                [&](const std::vector<Assignment>& assign) {
                                    ++count;
                                    const DispatchResult d = optimal_dispatch(p, assign);
                                    const double j = step_objective(p, assign, d.dispatch).total;
                                    if (j < best.j) {
                                        best.j = j;
                                        best.assignments = assign;
                                        best.dispatch = d.dispatch;
                                    }
                                });
    best.enumerated = count;
    return best;
}

struct Verdict {
    bool pass = true;
    std::string witness;
};

namespace detail {

inline std::vector<Matrix<double>> dispatch_probe_samples(const StepProblem& p,
                                                            std::uint64_t salt) {
    std::vector<Matrix<double>> samples;
    samples.push_back(zero_dispatch(p));
    // all-to-nearest and equal-split rules
    {
        Matrix<double> near = zero_dispatch(p), avg = zero_dispatch(p);
        for (int k = 0; k < p.num_hps(); ++k) {
            std::vector<int> reach;
            for (int i = 0; i < p.num_fcs(); ++i)
                if (p.supply(k, i)) reach.push_back(i);
            if (reach.empty()) continue;
            int nearest = reach.front();
            for (int i : reach)
                if (p.hps_fcs_dist_km(k, i) < p.hps_fcs_dist_km(k, nearest)) nearest = i;
            near(k, nearest) = p.hps[k].p_hydrogen_kw;
            for (int i : reach)
                avg(k, i) = p.hps[k].p_hydrogen_kw / static_cast<double>(reach.size());
        }
        samples.push_back(std::move(near));
        samples.push_back(std::move(avg));
    }
    std::mt19937_64 rng(salt);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int s = 0; s < 3; ++s) {
        Matrix<double> h = zero_dispatch(p);
        for (int k = 0; k < p.num_hps(); ++k) {
            double left = p.hps[k].p_hydrogen_kw * unit(rng);
            for (int i = 0; i < p.num_fcs(); ++i) {
                if (!p.supply(k, i)) continue;
                const double x = left * unit(rng);
                h(k, i) = x;
                left -= x;
            }
        }
        samples.push_back(std::move(h));
    }
    return samples;
}

} // namespace detail

/// Serving more EVs must always cost less: for every dispatch sample and at
/// the LP optimum, every feasible schedule of higher cardinality beats every
/// lower-cardinality one. Needs the penalty factor at or above gamma_bound.
inline Verdict check_service_priority(const SmallInstance& inst, double gamma) {
    StepProblem p = inst.problem;
    p.consts.gamma = gamma;

    std::vector<Matrix<double>> samples = detail::dispatch_probe_samples(p, 0xabcdef);
    // add the LP-optimal dispatch of the first maximum-cardinality schedule
    {
        const AssignmentResult km =
            solve_matching(build_extended_graph(p, station_prices(p, zero_dispatch(p))));
        samples.push_back(optimal_dispatch(p, km.assignments).dispatch);
    }

    Verdict v;
    for (std::size_t hs = 0; hs < samples.size() && v.pass; ++hs) {
        const Matrix<double>& h = samples[hs];
        // min and max step cost per cardinality class
        std::vector<double> min_j, max_j;
        detail::for_each_assignment(p, inst.enumeration_budget,
                                    [&](const std::vector<Assignment>& assign) {
                                        int card = 0;
                                        for (const Assignment& a : assign) card += a.served();
                                        const double j = step_objective(p, assign, h).total;
                                        if (card >= static_cast<int>(min_j.size())) {
                                            min_j.resize(card + 1,
                                                         std::numeric_limits<double>::infinity());
                                            max_j.resize(card + 1,
                                                         -std::numeric_limits<double>::infinity());
                                        }
                                        min_j[card] = std::min(min_j[card], j);
                                        max_j[card] = std::max(max_j[card], j);
                                    });
        for (std::size_t lo = 0; lo + 1 < min_j.size() && v.pass; ++lo) {
            if (!std::isfinite(min_j[lo])) continue;
            for (std::size_t hi = lo + 1; hi < min_j.size(); ++hi) {
                if (!std::isfinite(max_j[hi])) continue;
                if (!(max_j[hi] < min_j[lo])) {
                    std::ostringstream os;
                    os << "dispatch sample " << hs << ": cardinality " << hi
                       << " has cost " << max_j[hi] << " >= " << min_j[lo] << " at cardinality "
                       << lo << " (gamma " << gamma << ")";
                    v.pass = false;
                    v.witness = os.str();
                    break;
                }
            }
        }
    }
    return v;
}

/// The alternation trace must never rise, and must stay above the reference
/// optimum when one is supplied.
inline Verdict check_monotone_trace(const IterationTrace& trace, double tol = 1e-6,
                                    double lower_bound = -std::numeric_limits<double>::infinity()) {
    Verdict v;
    const std::vector<double> seq = trace.sequence();
    for (std::size_t s = 1; s < seq.size(); ++s) {
        if (seq[s] > seq[s - 1] + tol) {
            std::ostringstream os;
            os << "cost rose at position " << s << ": " << seq[s - 1] << " -> " << seq[s];
            v.pass = false;
            v.witness = os.str();
            return v;
        }
    }
    if (!seq.empty() && seq.back() < lower_bound - tol) {
        std::ostringstream os;
        os << "final cost " << seq.back() << " is below the reference optimum " << lower_bound;
        v.pass = false;
        v.witness = os.str();
    }
    return v;
}

struct InstanceLimits {
    int max_requests = 4;
    int max_fcs = 3;
    int max_hps = 2;
    int min_requests = 0;
    int min_slots = 0;
};

/// Random small instance over a random connected road graph; everything a
/// step problem needs, drawn with mixed reachability and supply patterns.
inline SmallInstance random_small_instance(std::mt19937_64& rng, const InstanceLimits& lim = {}) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform_int = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };
    auto uniform_real = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    const int nodes = uniform_int(5, 9);
    std::vector<RoadNetwork::Arc> arcs;
    for (int n = 1; n < nodes; ++n)
        arcs.push_back({uniform_int(0, n - 1), n, uniform_real(2.0, 10.0)});
    const int extra = uniform_int(0, 3);
    for (int e = 0; e < extra; ++e) {
        const int a = uniform_int(0, nodes - 1);
        const int b = uniform_int(0, nodes - 1);
        if (a != b) arcs.push_back({a, b, uniform_real(2.0, 10.0)});
    }
    const int n_fcs = uniform_int(1, lim.max_fcs);
    const int n_hps = uniform_int(1, lim.max_hps);
    std::vector<int> fcs_nodes(n_fcs), hps_nodes(n_hps);
    for (int& n : fcs_nodes) n = uniform_int(0, nodes - 1);
    for (int& n : hps_nodes) n = uniform_int(0, nodes - 1);
    const RoadNetwork net(nodes, arcs, fcs_nodes, hps_nodes);

    SmallInstance inst;
    StepProblem& p = inst.problem;
    p.delta_hours = 0.25;
    p.tou_price = uniform_real(0.3, 1.2);
    p.consts = CostConstants{};
    p.supply = supply_matrix(net, 48.0, p.delta_hours);
    p.hps_fcs_dist_km = net.hps_fcs_distances();
    p.now_slots.resize(n_fcs);
    p.next_slots.resize(n_fcs);
    p.base_load_kw.resize(n_fcs);
    p.demand_kwh.resize(n_fcs);
    for (int i = 0; i < n_fcs; ++i) {
        p.now_slots[i] = uniform_int(0, 2);
        p.next_slots[i] = uniform_int(0, 1);
        p.base_load_kw[i] = uniform_real(50.0, 300.0);
        p.demand_kwh[i] = uniform_real(0.0, 200.0);
    }
    while (p.total_slots() < lim.min_slots) p.now_slots[uniform_int(0, n_fcs - 1)] += 1;
    p.hps.resize(n_hps);
    for (int k = 0; k < n_hps; ++k) {
        p.hps[k].p_hydrogen_kw = unit(rng) < 0.25 ? 0.0 : uniform_real(0.0, 500.0);
        p.hps[k].p_wind_kw = uniform_real(0.0, 2200.0);
        p.hps[k].p_pv_kw = uniform_real(0.0, 880.0);
        p.hps[k].delivery_per_kw = uniform_real(0.0, 0.08);
    }
    const int n_req = uniform_int(lim.min_requests, lim.max_requests);
    for (int r = 0; r < n_req; ++r) {
        RequestView rv;
        rv.ev_id = r;
        rv.soc = uniform_real(0.05, 0.9);
        rv.capacity_kwh = 75.0;
        rv.loaded = unit(rng) < 0.5;
        rv.speed_kmh = uniform_real(30.0, 80.0);
        const int pos = uniform_int(0, nodes - 1);
        const int dest = uniform_int(0, nodes - 1);
        rv.origin_leg_km = net.shortest_distance(uniform_int(0, nodes - 1), pos);
        rv.dist_to_fcs_km.resize(n_fcs);
        rv.fcs_to_dest_km.assign(n_fcs, 0.0);
        rv.reachable.resize(n_fcs);
        const double radius = rv.speed_kmh * p.delta_hours;
        for (int i = 0; i < n_fcs; ++i) {
            rv.dist_to_fcs_km[i] = net.distance_to_fcs(pos, i);
            rv.reachable[i] = rv.dist_to_fcs_km[i] <= radius ? 1 : 0;
            if (rv.loaded) rv.fcs_to_dest_km[i] = net.shortest_distance(net.fcs_nodes()[i], dest);
        }
        p.requests.push_back(std::move(rv));
    }
    // penalty factor at the service-priority bound, the regime the matcher's
    // cardinality-first objective is built for
    p.consts.gamma = std::max(p.consts.gamma, gamma_bound(p) + 1.0);
    return inst;
}

// ---- instance serialization (same line-oriented style as the graph dump) --

inline void dump_instance(const SmallInstance& inst, std::ostream& os) {
    const StepProblem& p = inst.problem;
    os.precision(17);
    os << "instance " << p.num_fcs() << ' ' << p.num_hps() << ' ' << p.num_requests() << '\n';
    os << "step " << p.delta_hours << ' ' << p.tou_price << '\n';
    const CostConstants& k = p.consts;
    os << "consts " << k.wait_per_hour << ' ' << k.idle_per_hour << ' ' << k.depreciation_per_km
       << ' ' << k.fcs_maint_per_kw << ' ' << k.loss_kwh_per_km << ' ' << k.charge_efficiency
       << ' ' << k.gamma << ' ' << k.rates.noload_kw << ' ' << k.rates.loaded_kw << '\n';
    for (int i = 0; i < p.num_fcs(); ++i)
        os << "fcs " << i << ' ' << p.now_slots[i] << ' ' << p.next_slots[i] << ' '
           << p.base_load_kw[i] << ' ' << p.demand_kwh[i] << '\n';
    for (int h = 0; h < p.num_hps(); ++h) {
        os << "hps " << h << ' ' << p.hps[h].p_hydrogen_kw << ' ' << p.hps[h].p_wind_kw << ' '
           << p.hps[h].p_pv_kw << ' ' << p.hps[h].maint_wind_per_kw << ' '
           << p.hps[h].maint_pv_per_kw << ' ' << p.hps[h].delivery_per_kw;
        for (int i = 0; i < p.num_fcs(); ++i)
            os << ' ' << static_cast<int>(p.supply(h, i)) << ' ' << p.hps_fcs_dist_km(h, i);
        os << '\n';
    }
    for (int r = 0; r < p.num_requests(); ++r) {
        const RequestView& rv = p.requests[r];
        os << "req " << r << ' ' << rv.ev_id << ' ' << rv.soc << ' ' << rv.capacity_kwh << ' '
           << (rv.loaded ? 1 : 0) << ' ' << rv.speed_kmh << ' ' << rv.origin_leg_km;
        for (int i = 0; i < p.num_fcs(); ++i)
            os << ' ' << rv.dist_to_fcs_km[i] << ' ' << rv.fcs_to_dest_km[i] << ' '
               << static_cast<int>(rv.reachable[i]);
        os << '\n';
    }
}

inline SmallInstance parse_instance(std::istream& is) {
    SmallInstance inst;
    StepProblem& p = inst.problem;
    std::string tag;
    int n_fcs = 0, n_hps = 0, n_req = 0;
    if (!(is >> tag >> n_fcs >> n_hps >> n_req) || tag != "instance")
        throw std::invalid_argument("instance parse: bad header");
    if (!(is >> tag >> p.delta_hours >> p.tou_price) || tag != "step")
        throw std::invalid_argument("instance parse: bad step line");
    CostConstants& k = p.consts;
    if (!(is >> tag >> k.wait_per_hour >> k.idle_per_hour >> k.depreciation_per_km >>
          k.fcs_maint_per_kw >> k.loss_kwh_per_km >> k.charge_efficiency >> k.gamma >>
          k.rates.noload_kw >> k.rates.loaded_kw) ||
        tag != "consts")
        throw std::invalid_argument("instance parse: bad consts line");
    p.now_slots.resize(n_fcs);
    p.next_slots.resize(n_fcs);
    p.base_load_kw.resize(n_fcs);
    p.demand_kwh.resize(n_fcs);
    for (int i = 0; i < n_fcs; ++i) {
        int idx = 0;
        if (!(is >> tag >> idx >> p.now_slots[i] >> p.next_slots[i] >> p.base_load_kw[i] >>
              p.demand_kwh[i]) ||
            tag != "fcs")
            throw std::invalid_argument("instance parse: bad fcs line");
    }
    p.hps.resize(n_hps);
    p.supply = Matrix<std::uint8_t>(n_hps, n_fcs, 0);
    p.hps_fcs_dist_km = Matrix<double>(n_hps, n_fcs, 0.0);
    for (int h = 0; h < n_hps; ++h) {
        int idx = 0;
        if (!(is >> tag >> idx >> p.hps[h].p_hydrogen_kw >> p.hps[h].p_wind_kw >>
              p.hps[h].p_pv_kw >> p.hps[h].maint_wind_per_kw >> p.hps[h].maint_pv_per_kw >>
              p.hps[h].delivery_per_kw) ||
            tag != "hps")
            throw std::invalid_argument("instance parse: bad hps line");
        for (int i = 0; i < n_fcs; ++i) {
            int sup = 0;
            double d = 0.0;
            if (!(is >> sup >> d)) throw std::invalid_argument("instance parse: bad supply entry");
            p.supply(h, i) = static_cast<std::uint8_t>(sup);
            p.hps_fcs_dist_km(h, i) = d;
        }
    }
    for (int r = 0; r < n_req; ++r) {
        RequestView rv;
        int idx = 0, loaded = 0;
        if (!(is >> tag >> idx >> rv.ev_id >> rv.soc >> rv.capacity_kwh >> loaded >>
              rv.speed_kmh >> rv.origin_leg_km) ||
            tag != "req")
            throw std::invalid_argument("instance parse: bad req line");
        rv.loaded = loaded != 0;
        rv.dist_to_fcs_km.resize(n_fcs);
        rv.fcs_to_dest_km.resize(n_fcs);
        rv.reachable.resize(n_fcs);
        for (int i = 0; i < n_fcs; ++i) {
            int reach = 0;
            if (!(is >> rv.dist_to_fcs_km[i] >> rv.fcs_to_dest_km[i] >> reach))
                throw std::invalid_argument("instance parse: bad req distances");
            rv.reachable[i] = static_cast<std::uint8_t>(reach);
        }
        p.requests.push_back(std::move(rv));
    }
    return inst;
}

} // namespace hycharge
