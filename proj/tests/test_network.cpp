#include <catch2/catch_amalgamated.hpp>

#include <limits>
#include <random>

#include "hycharge/network.hpp"

using namespace hycharge;

namespace {

RoadNetwork two_node(double len) { return RoadNetwork(2, {{0, 1, len}}, {1}, {0}); }

// brute-force all-pairs by Floyd-Warshall, the independent reference
Matrix<double> floyd_warshall(int n, const std::vector<RoadNetwork::Arc>& arcs) {
    const double inf = std::numeric_limits<double>::infinity();
    Matrix<double> d(n, n, inf);
    for (int i = 0; i < n; ++i) d(i, i) = 0.0;
    for (const auto& a : arcs) {
        d(a.a, a.b) = std::min(d(a.a, a.b), a.length_km);
        d(a.b, a.a) = std::min(d(a.b, a.a), a.length_km);
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
    return d;
}

std::vector<RoadNetwork::Arc> random_connected_arcs(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> len(1.0, 12.0);
    std::vector<RoadNetwork::Arc> arcs;
    for (int v = 1; v < n; ++v)
        arcs.push_back({static_cast<int>(rng() % v), v, len(rng)});
    const int extra = static_cast<int>(rng() % 5);
    for (int e = 0; e < extra; ++e) {
        const int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
        if (a != b) arcs.push_back({a, b, len(rng)});
    }
    return arcs;
}

} // namespace

TEST_CASE("shortest distance basics") {
    RoadNetwork net = two_node(5.0);
    CHECK(net.shortest_distance(0, 0) == 0.0);
    CHECK(net.shortest_distance(1, 1) == 0.0);
    CHECK(net.shortest_distance(0, 1) == 5.0);

    // triangle with arcs 3, 4, 10: the long pair is cheaper around the corner
    RoadNetwork tri(3, {{0, 1, 3.0}, {1, 2, 4.0}, {0, 2, 10.0}}, {0}, {2});
    CHECK(tri.shortest_distance(0, 2) == Catch::Approx(7.0));
    CHECK(tri.shortest_distance(2, 0) == Catch::Approx(7.0));
}

TEST_CASE("network rejects bad input") {
    CHECK_THROWS_AS(two_node(0.0), std::invalid_argument);
    CHECK_THROWS_AS(two_node(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(RoadNetwork(2, {{0, 5, 1.0}}, {}, {}), std::invalid_argument);
    // disconnected pair is forbidden at construction
    CHECK_THROWS_AS(RoadNetwork(3, {{0, 1, 1.0}}, {}, {}), std::invalid_argument);
    RoadNetwork net = two_node(5.0);
    CHECK_THROWS_AS(net.shortest_distance(0, 7), std::invalid_argument);
    CHECK_THROWS_AS(RoadNetwork(3, {{0, 1, 1.0}, {1, 2, 1.0}}, {9}, {}), std::invalid_argument);
}

TEST_CASE("shortest distance is a metric, against brute force") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 8);
        const auto arcs = random_connected_arcs(rng, n);
        const RoadNetwork net(n, arcs, {}, {});
        const Matrix<double> ref = floyd_warshall(n, arcs);
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                CHECK(net.shortest_distance(a, b) == Catch::Approx(ref(a, b)).margin(1e-12));
                CHECK(net.shortest_distance(a, b) ==
                      Catch::Approx(net.shortest_distance(b, a)).margin(1e-12));
                CHECK(net.shortest_distance(a, b) >= 0.0);
                for (int c = 0; c < n; ++c)
                    CHECK(net.shortest_distance(a, b) <=
                          net.shortest_distance(a, c) + net.shortest_distance(c, b) + 1e-9);
            }
        }
    }
}

TEST_CASE("ev reachability boundary is inclusive") {
    // station 15 km away, 60 km/h and a quarter hour reach exactly 15 km
    RoadNetwork at15 = two_node(15.0);
    auto r = ev_reachability(at15, {0}, {60.0}, 0.25);
    CHECK(r(0, 0) == 1);

    RoadNetwork at1501 = two_node(15.01);
    r = ev_reachability(at1501, {0}, {60.0}, 0.25);
    CHECK(r(0, 0) == 0);

    // colocated EV and station
    r = ev_reachability(at1501, {1}, {60.0}, 0.25);
    CHECK(r(0, 0) == 1);

    CHECK_THROWS_AS(ev_reachability(at15, {0}, {60.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ev_reachability(at15, {0}, {0.0}, 0.25), std::invalid_argument);
}

TEST_CASE("supply matrix boundary") {
    RoadNetwork at12 = two_node(12.0);
    CHECK(supply_matrix(at12, 48.0, 0.25)(0, 0) == 1);
    RoadNetwork at20 = two_node(20.0);
    CHECK(supply_matrix(at20, 48.0, 0.25)(0, 0) == 0);
    RoadNetwork same(2, {{0, 1, 3.0}}, {0}, {0});
    CHECK(supply_matrix(same, 48.0, 0.25)(0, 0) == 1);
}

TEST_CASE("reachability is monotone in speed and step length") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 6);
        const auto arcs = random_connected_arcs(rng, n);
        std::vector<int> fcs = {static_cast<int>(rng() % n), static_cast<int>(rng() % n)};
        const RoadNetwork net(n, arcs, fcs, {0});
        std::vector<int> pos = {static_cast<int>(rng() % n), static_cast<int>(rng() % n),
                                static_cast<int>(rng() % n)};
        std::uniform_real_distribution<double> sp(20.0, 60.0);
        std::vector<double> v = {sp(rng), sp(rng), sp(rng)};
        const auto base = ev_reachability(net, pos, v, 0.25);

        std::vector<double> faster = v;
        for (double& s : faster) s *= 1.5;
        const auto more_speed = ev_reachability(net, pos, faster, 0.25);
        const auto more_time = ev_reachability(net, pos, v, 0.4);
        for (std::size_t i = 0; i < base.rows(); ++i) {
            for (std::size_t j = 0; j < base.cols(); ++j) {
                if (base(i, j)) {
                    CHECK(more_speed(i, j) == 1);
                    CHECK(more_time(i, j) == 1);
                }
            }
        }
    }
}
