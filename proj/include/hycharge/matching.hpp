#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hycharge/hungarian.hpp"
#include "hycharge/step.hpp"

namespace hycharge {

/// Lower-level bipartite graph with every station expanded into its free
/// piles ("now" slots) plus the piles freed by next-step departures
/// ("next" slots, one extra step of waiting).
struct ExtendedBipartiteGraph {
    struct Slot {
        int fcs = 0;
        bool deferred = false;
    };
    struct Edge {
        int slot = 0;
        int request = 0;
        double raw_cost = 0.0;  // M
        double weight = 0.0;    // O, filled by transform_weights
    };

    std::vector<Slot> slots;
    int num_requests = 0;
    std::vector<Edge> edges;

    int supply_count() const { return static_cast<int>(slots.size()); }
};

/// Candidate cost of serving one request at one station slot: the EV's own
/// cost, the pile maintenance it causes, and one step of waiting when the
/// slot only frees up next step.
inline double edge_cost(const StepProblem& p, int request, int fcs, bool deferred,
                        const std::vector<double>& prices) {
    const double c1 = p.request_cost_terms(request, fcs, prices[fcs]).total();
    const double maint =
        p.consts.fcs_maint_per_kw * charging_power(p.requests[request].loaded, p.consts.rates);
    const double wait_extra = deferred ? p.consts.wait_per_hour * p.delta_hours : 0.0;
    return c1 + maint + wait_extra;
}

/// Cost-to-weight flip for maximum-weight matching: O = max M - M + 1, so
/// every weight is at least 1 and edge order reverses.
inline std::vector<double> transform_weights(const std::vector<double>& raw_costs) {
    if (raw_costs.empty()) return {};
    const double max_m = *std::max_element(raw_costs.begin(), raw_costs.end());
    std::vector<double> o(raw_costs.size());
    for (std::size_t e = 0; e < raw_costs.size(); ++e) o[e] = max_m - raw_costs[e] + 1.0;
    return o;
}

inline ExtendedBipartiteGraph build_extended_graph(const StepProblem& p,
                                                   const std::vector<double>& prices) {
    ExtendedBipartiteGraph g;
    g.num_requests = p.num_requests();
    // more than num_requests duplicates of one station can never be used
    for (int i = 0; i < p.num_fcs(); ++i) {
        const int now = std::min(p.now_slots[i], p.num_requests());
        const int next = std::min(p.next_slots[i], p.num_requests());
        for (int c = 0; c < now; ++c) g.slots.push_back({i, false});
        for (int c = 0; c < next; ++c) g.slots.push_back({i, true});
    }
    for (int s = 0; s < g.supply_count(); ++s) {
        const auto& slot = g.slots[s];
        for (int r = 0; r < g.num_requests; ++r) {
            if (!p.requests[r].reachable[slot.fcs]) continue;
            g.edges.push_back({s, r, edge_cost(p, r, slot.fcs, slot.deferred, prices), 0.0});
        }
    }
    std::vector<double> raw(g.edges.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) raw[e] = g.edges[e].raw_cost;
    const std::vector<double> weights = transform_weights(raw);
    for (std::size_t e = 0; e < g.edges.size(); ++e) g.edges[e].weight = weights[e];
    return g;
}

/// Smallest penalty factor that makes serving one more EV always worth it:
/// the costliest admissible pairing times the tightest of supply and demand.
inline double gamma_bound(const StepProblem& p) {
    double worst = 0.0;
    bool any = false;
    for (int r = 0; r < p.num_requests(); ++r) {
        for (int i = 0; i < p.num_fcs(); ++i) {
            if (!p.requests[r].reachable[i]) continue;
            const CostTerms t = p.request_cost_terms(r, i, p.tou_price);
            const double term =
                t.total() +
                p.consts.fcs_maint_per_kw * charging_power(p.requests[r].loaded, p.consts.rates) +
                p.consts.wait_per_hour * p.delta_hours;
            worst = std::max(worst, term);
            any = true;
        }
    }
    if (!any) return 0.0;
    return worst * std::min(p.total_slots(), p.num_requests());
}

struct AssignmentResult {
    std::vector<Assignment> assignments;  // per request
    std::vector<int> unmatched;           // request indices left unserved
    double matched_cost = 0.0;            // sum of raw edge costs M
    int cardinality = 0;
};

/// Maximum-cardinality maximum-weight matching of the extended graph.
/// A per-edge bonus larger than any possible total weight makes every bigger
/// matching outweigh every smaller one, so cardinality is maximized first
/// and the raw cost sum minimized second. Exact ties prefer low station and
/// request indices.
inline AssignmentResult solve_matching(const ExtendedBipartiteGraph& g) {
    AssignmentResult res;
    res.assignments.assign(g.num_requests, Assignment{});
    if (g.edges.empty() || g.supply_count() == 0 || g.num_requests == 0) {
        for (int r = 0; r < g.num_requests; ++r) res.unmatched.push_back(r);
        return res;
    }

    double max_weight = 1.0;
    for (const auto& e : g.edges) max_weight = std::max(max_weight, e.weight);
    const double bonus = static_cast<double>(g.supply_count()) * max_weight + 1.0;

    const int n = std::max(g.supply_count(), g.num_requests);
    Matrix<PairCost> cost(n, n, PairCost{0.0, 0.0});
    for (const auto& e : g.edges) {
        // minimize negated weight; tie part ranks edges by (slot, request)
        const double rank = static_cast<double>(e.slot) * g.num_requests + e.request + 1.0;
        cost(e.slot, e.request) = PairCost{-(e.weight + bonus), rank};
    }

    const std::vector<int> match = min_cost_assignment(cost);
    std::vector<char> served(g.num_requests, 0);
    for (const auto& e : g.edges) {
        if (match[e.slot] != e.request) continue;
        res.assignments[e.request] = Assignment{g.slots[e.slot].fcs, g.slots[e.slot].deferred};
        res.matched_cost += e.raw_cost;
        res.cardinality += 1;
        served[e.request] = 1;
    }
    for (int r = 0; r < g.num_requests; ++r)
        if (!served[r]) res.unmatched.push_back(r);
    return res;
}

/// Line-oriented dump for debugging and replay.
inline void dump_graph(const ExtendedBipartiteGraph& g, std::ostream& os) {
    os << "graph " << g.supply_count() << ' ' << g.num_requests << ' ' << g.edges.size() << '\n';
    for (int s = 0; s < g.supply_count(); ++s)
        os << "slot " << s << ' ' << g.slots[s].fcs << ' ' << (g.slots[s].deferred ? "next" : "now")
           << '\n';
    os.precision(17);
    for (const auto& e : g.edges)
        os << "edge " << e.slot << ' ' << e.request << ' ' << e.raw_cost << ' ' << e.weight << '\n';
}

inline ExtendedBipartiteGraph parse_graph(std::istream& is) {
    ExtendedBipartiteGraph g;
    std::string tag;
    int n_slots = 0, n_req = 0;
    std::size_t n_edges = 0;
    if (!(is >> tag >> n_slots >> n_req >> n_edges) || tag != "graph")
        throw std::invalid_argument("graph parse: bad header");
    g.num_requests = n_req;
    g.slots.resize(n_slots);
    for (int s = 0; s < n_slots; ++s) {
        int idx = 0;
        std::string kind;
        ExtendedBipartiteGraph::Slot slot;
        if (!(is >> tag >> idx >> slot.fcs >> kind) || tag != "slot")
            throw std::invalid_argument("graph parse: bad slot line");
        slot.deferred = kind == "next";
        g.slots[idx] = slot;
    }
    for (std::size_t e = 0; e < n_edges; ++e) {
        ExtendedBipartiteGraph::Edge edge;
        if (!(is >> tag >> edge.slot >> edge.request >> edge.raw_cost >> edge.weight) ||
            tag != "edge")
            throw std::invalid_argument("graph parse: bad edge line");
        g.edges.push_back(edge);
    }
    return g;
}

} // namespace hycharge
