#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "hycharge/matrix.hpp"

namespace hycharge {

/// Undirected road graph with km arc lengths. Stations and hydrogen plants
/// are placed on nodes. All-pairs shortest distances are computed once at
/// construction; the graph is immutable afterwards, so concurrent reads are
/// safe.
class RoadNetwork {
public:
    struct Arc {
        int a = 0;
        int b = 0;
        double length_km = 0.0;
    };

    RoadNetwork() = default;

    RoadNetwork(int node_count, std::vector<Arc> arcs,
                std::vector<int> fcs_nodes, std::vector<int> hps_nodes)
        : node_count_(node_count),
          arcs_(std::move(arcs)),
          fcs_nodes_(std::move(fcs_nodes)),
          hps_nodes_(std::move(hps_nodes)) {
        if (node_count_ <= 0) throw std::invalid_argument("network: node count must be positive");
        adjacency_.assign(node_count_, {});
        for (const Arc& arc : arcs_) {
            check_node(arc.a);
            check_node(arc.b);
            if (arc.length_km <= 0.0)
                throw std::invalid_argument("network: arc length must be strictly positive");
            adjacency_[arc.a].push_back({arc.b, arc.length_km});
            adjacency_[arc.b].push_back({arc.a, arc.length_km});
        }
        for (int n : fcs_nodes_) check_node(n);
        for (int n : hps_nodes_) check_node(n);
        compute_all_pairs();
    }

    int node_count() const { return node_count_; }
    const std::vector<Arc>& arcs() const { return arcs_; }
    const std::vector<int>& fcs_nodes() const { return fcs_nodes_; }
    const std::vector<int>& hps_nodes() const { return hps_nodes_; }
    int num_fcs() const { return static_cast<int>(fcs_nodes_.size()); }
    int num_hps() const { return static_cast<int>(hps_nodes_.size()); }

    /// Shortest-path distance in km between two nodes.
    double shortest_distance(int a, int b) const {
        check_node(a);
        check_node(b);
        return dist_(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    }

    double distance_to_fcs(int node, int fcs_index) const {
        return shortest_distance(node, fcs_nodes_.at(fcs_index));
    }

    /// Distance matrix D between hydrogen plants (rows) and stations (cols).
    Matrix<double> hps_fcs_distances() const {
        Matrix<double> d(hps_nodes_.size(), fcs_nodes_.size());
        for (std::size_t k = 0; k < hps_nodes_.size(); ++k)
            for (std::size_t i = 0; i < fcs_nodes_.size(); ++i)
                d(k, i) = shortest_distance(hps_nodes_[k], fcs_nodes_[i]);
        return d;
    }

private:
    struct Edge {
        int to;
        double w;
    };

    void check_node(int n) const {
        if (n < 0 || n >= node_count_) throw std::invalid_argument("network: unknown node id");
    }

    void compute_all_pairs() {
        const double inf = std::numeric_limits<double>::infinity();
        dist_ = Matrix<double>(node_count_, node_count_, inf);
        for (int src = 0; src < node_count_; ++src) dijkstra(src);
        for (int a = 0; a < node_count_; ++a)
            for (int b = 0; b < node_count_; ++b)
                if (!(dist_(a, b) < inf))
                    throw std::invalid_argument("network: graph must be connected");
    }

    void dijkstra(int src) {
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        dist_(src, src) = 0.0;
        heap.push({0.0, src});
        while (!heap.empty()) {
            auto [d, u] = heap.top();
            heap.pop();
            if (d > dist_(src, u)) continue;
            for (const Edge& e : adjacency_[u]) {
                double nd = d + e.w;
                if (nd < dist_(src, e.to)) {
                    dist_(src, e.to) = nd;
                    heap.push({nd, e.to});
                }
            }
        }
    }

    int node_count_ = 0;
    std::vector<Arc> arcs_;
    std::vector<int> fcs_nodes_;
    std::vector<int> hps_nodes_;
    std::vector<std::vector<Edge>> adjacency_;
    Matrix<double> dist_;
};

struct ReachabilityMatrices {
    Matrix<std::uint8_t> reach;  // stations x EVs, 1 = station usable this step
    Matrix<std::uint8_t> supply; // plants x stations, 1 = deliverable this step
};

/// Station options per EV: entry (i, j) is 1 exactly when EV j can reach
/// station i within one step at its own speed. The boundary is inclusive.
inline Matrix<std::uint8_t> ev_reachability(const RoadNetwork& net,
                                            const std::vector<int>& ev_positions,
                                            const std::vector<double>& ev_speed_kmh,
                                            double delta_hours) {
    if (delta_hours <= 0.0) throw std::invalid_argument("reachability: delta must be positive");
    const std::size_t ns = net.fcs_nodes().size();
    const std::size_t nev = ev_positions.size();
    if (ev_speed_kmh.size() != nev)
        throw std::invalid_argument("reachability: speed per EV required");
    Matrix<std::uint8_t> r(ns, nev, 0);
    for (std::size_t j = 0; j < nev; ++j) {
        if (ev_speed_kmh[j] <= 0.0)
            throw std::invalid_argument("reachability: EV speed must be positive");
        const double radius = ev_speed_kmh[j] * delta_hours;
        for (std::size_t i = 0; i < ns; ++i)
            r(i, j) = net.distance_to_fcs(ev_positions[j], static_cast<int>(i)) <= radius ? 1 : 0;
    }
    return r;
}

/// Deliverability of hydrogen plant k to station i within one step by tanker.
inline Matrix<std::uint8_t> supply_matrix(const RoadNetwork& net, double tanker_speed_kmh,
                                          double delta_hours) {
    if (tanker_speed_kmh <= 0.0) throw std::invalid_argument("supply: tanker speed must be positive");
    const double radius = tanker_speed_kmh * delta_hours;
    Matrix<double> d = net.hps_fcs_distances();
    Matrix<std::uint8_t> l(d.rows(), d.cols(), 0);
    for (std::size_t k = 0; k < d.rows(); ++k)
        for (std::size_t i = 0; i < d.cols(); ++i)
            l(k, i) = d(k, i) <= radius ? 1 : 0;
    return l;
}

} // namespace hycharge
