#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hycharge/ev.hpp"
#include "hycharge/network.hpp"
#include "hycharge/renewables.hpp"
#include "hycharge/step.hpp"

namespace hycharge {

struct NetworkConfig {
    int node_count = 0;                    // 0 = use the built-in 26-node map
    std::vector<RoadNetwork::Arc> arcs;
    std::vector<int> fcs_nodes;
    std::vector<int> hps_nodes;
};

struct SimConfig {
    double delta_hours = 0.25;
    int steps = 96;
    double epsilon = 2.0;
    int max_iterations = 50;
    bool drop_unserved = false;  // default: unserved requests retry next step
};

struct EvConfig {
    int count = 200;
    double capacity_kwh = 75.0;
    double speed_kmh = 60.0;
};

struct FcsConfig {
    std::vector<int> piles;        // scalar configs replicate over stations
    double base_load_kw = 200.0;
    double demand_prior_kwh = 100.0;
    int ewma_window = 4;
    double ewma_decay = 0.5;
};

struct HpsConfig {
    WindParams wind;
    PvParams pv;
    HydrogenChainParams chain;
    double base_load_kw = 400.0;
    double maint_wind_per_kw = 0.018;
    double maint_pv_per_kw = 0.018;
    double delivery_per_kw = 0.04;
    double tanker_speed_kmh = 48.0;
};

struct RequestConfig {
    double daily_per_ev = 3.0;
    std::vector<double> hourly_profile;  // 24 weights
    double soc_min = 0.15;
    double soc_max = 0.5;
    double loaded_probability = 0.5;
};

struct WeatherConfig {
    double wind_mean_ms = 7.5;
    double wind_amplitude_ms = 3.0;
    double wind_noise_ms = 1.2;
    double solar_peak_w = 800.0;
    double solar_noise_w = 40.0;
    std::vector<std::vector<double>> wind_traces;   // optional explicit [hps][step]
    std::vector<std::vector<double>> solar_traces;
};

struct ScenarioConfig {
    SimConfig sim;
    NetworkConfig network;
    EvConfig ev;
    CostConstants costs;
    FcsConfig fcs;
    HpsConfig hps;
    RequestConfig requests;
    WeatherConfig weather;
    std::vector<std::pair<int, double>> tou_pattern;  // (start hour, CNY/kWh)
    std::vector<double> tou_values;                   // explicit per-slot day, wins if set

    void validate() const;
};

/// Built-in 26-node map: a 5x5 block grid plus an outlying depot node,
/// arc lengths a few km each.
inline NetworkConfig builtin_network() {
    NetworkConfig n;
    n.node_count = 26;
    auto len = [](int a, int b) { return 3.0 + ((a * 7 + b * 3) % 9) * 0.5; };
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 5; ++c) {
            const int id = r * 5 + c;
            if (c + 1 < 5) n.arcs.push_back({id, id + 1, len(id, id + 1)});
            if (r + 1 < 5) n.arcs.push_back({id, id + 5, len(id, id + 5)});
        }
    }
    n.arcs.push_back({6, 12, 4.5});
    n.arcs.push_back({12, 18, 4.0});
    n.arcs.push_back({19, 25, 6.5});
    n.arcs.push_back({24, 25, 4.0});
    n.fcs_nodes = {2, 6, 12, 18, 22};
    n.hps_nodes = {0, 24};
    return n;
}

inline ScenarioConfig default_config() {
    ScenarioConfig c;
    c.network = builtin_network();
    c.fcs.piles.assign(c.network.fcs_nodes.size(), 12);
    c.requests.hourly_profile = {0.40, 0.30, 0.25, 0.20, 0.25, 0.45, 0.80, 1.20,
                                 1.50, 1.30, 1.10, 1.05, 1.10, 1.00, 0.95, 1.00,
                                 1.20, 1.50, 1.60, 1.40, 1.20, 1.00, 0.80, 0.60};
    c.tou_pattern = {{0, 0.31}, {7, 0.64}, {8, 1.07}, {11, 0.64}, {13, 1.07},
                     {15, 0.64}, {18, 1.07}, {21, 0.64}, {23, 0.31}};
    // the printed chain constants give an implausible conversion; run the
    // plant at a representative power-to-hydrogen-to-power ratio instead
    c.hps.chain.power_coefficient = 0.6;
    c.costs.gamma = 2000.0;  // keep service-priority airtight at this scale
    return c;
}

inline void ScenarioConfig::validate() const {
    costs.validate();
    if (sim.delta_hours <= 0.0) throw std::invalid_argument("config: sim.delta_hours must be > 0");
    if (sim.steps <= 0) throw std::invalid_argument("config: sim.steps must be > 0");
    if (sim.epsilon <= 0.0) throw std::invalid_argument("config: sim.epsilon must be > 0");
    if (ev.count <= 0) throw std::invalid_argument("config: ev.count must be > 0");
    if (ev.capacity_kwh <= 0.0) throw std::invalid_argument("config: ev.capacity_kwh must be > 0");
    if (ev.speed_kmh <= 0.0) throw std::invalid_argument("config: ev.speed_kmh must be > 0");
    if (fcs.piles.size() != network.fcs_nodes.size())
        throw std::invalid_argument("config: fcs.piles must match the station count");
    for (int piles : fcs.piles)
        if (piles <= 0) throw std::invalid_argument("config: fcs.piles entries must be > 0");
    if (fcs.base_load_kw < 0.0 || fcs.demand_prior_kwh < 0.0)
        throw std::invalid_argument("config: fcs loads must be nonnegative");
    if (fcs.base_load_kw + fcs.demand_prior_kwh <= 0.0)
        throw std::invalid_argument("config: fcs base load plus demand prior must be positive");
    if (fcs.ewma_window < 1) throw std::invalid_argument("config: fcs.ewma_window must be >= 1");
    if (fcs.ewma_decay <= 0.0 || fcs.ewma_decay > 1.0)
        throw std::invalid_argument("config: fcs.ewma_decay must be in (0,1]");
    hps.wind.validate();
    hps.pv.validate();
    hps.chain.validate();
    if (hps.tanker_speed_kmh <= 0.0)
        throw std::invalid_argument("config: hps.tanker_speed_kmh must be > 0");
    if (requests.daily_per_ev < 0.0)
        throw std::invalid_argument("config: requests.daily_per_ev must be >= 0");
    if (requests.hourly_profile.size() != 24)
        throw std::invalid_argument("config: requests.hourly_profile needs 24 entries");
    if (requests.soc_min < 0.0 || requests.soc_max > 1.0 || requests.soc_min > requests.soc_max)
        throw std::invalid_argument("config: requests soc range must be within [0,1]");
    if (requests.loaded_probability < 0.0 || requests.loaded_probability > 1.0)
        throw std::invalid_argument("config: requests.loaded_probability must be in [0,1]");
    if (tou_pattern.empty() && tou_values.empty())
        throw std::invalid_argument("config: tou pattern or values required");
    for (double v : tou_values)
        if (v < 0.0) throw std::invalid_argument("config: tou.values must be nonnegative");
}

/// Expand the (start hour, price) pattern to one tariff entry per step.
inline std::vector<double> expand_tou(const std::vector<std::pair<int, double>>& pattern,
                                      double delta_hours, int steps) {
    std::vector<double> day(24, pattern.front().second);
    for (const auto& [hour, price] : pattern) {
        if (hour < 0 || hour >= 24) throw std::invalid_argument("config: tou hour out of range");
        for (int h = hour; h < 24; ++h) day[h] = price;
    }
    std::vector<double> out(steps);
    for (int t = 0; t < steps; ++t) {
        const int hour = static_cast<int>(std::fmod(t * delta_hours, 24.0));
        out[t] = day[hour];
    }
    return out;
}

/// Tariff per step from an explicit per-slot day vector, cycled over days.
inline std::vector<double> cycle_tou(const std::vector<double>& slot_values, int steps) {
    if (slot_values.empty()) throw std::invalid_argument("config: tou.values must not be empty");
    std::vector<double> out(steps);
    for (int t = 0; t < steps; ++t)
        out[t] = slot_values[t % slot_values.size()];
    return out;
}

/// One pre-drawn charging request: where it pops up and what the EV needs.
struct RequestSpec {
    int node = 0;
    bool loaded = false;
    double soc = 0.3;
    int destination = -1;

    bool operator==(const RequestSpec&) const = default;
};

/// Fully materialized run input: the network, tariffs, per-plant weather and
/// the request stream, all drawn up front from the seed so that repeated
/// runs and parameter sweeps see identical randomness.
struct Scenario {
    ScenarioConfig cfg;
    RoadNetwork net;
    Matrix<std::uint8_t> supply;       // plants x stations
    Matrix<double> hps_fcs_dist;
    std::vector<double> tou;                          // per step
    std::vector<std::vector<double>> wind_trace;      // [hps][step]
    std::vector<std::vector<double>> solar_trace;     // [hps][step]
    std::vector<std::vector<RequestSpec>> request_schedule;  // [step]
    std::vector<int> ev_initial_node;
    std::uint64_t seed = 0;

    int steps_per_day() const {
        return std::max(1, static_cast<int>(std::lround(24.0 / cfg.sim.delta_hours)));
    }

    bool same_draws(const Scenario& o) const {
        return seed == o.seed && tou == o.tou && wind_trace == o.wind_trace &&
               solar_trace == o.solar_trace && request_schedule == o.request_schedule &&
               ev_initial_node == o.ev_initial_node;
    }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d4a61485329eb7ULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t s = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
    return std::mt19937_64(splitmix64(s));
}

} // namespace detail

inline Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
    ScenarioConfig cfg = config;
    if (cfg.network.node_count == 0) cfg.network = builtin_network();
    if (cfg.fcs.piles.empty()) cfg.fcs.piles.assign(cfg.network.fcs_nodes.size(), 8);
    cfg.validate();

    Scenario sc;
    sc.cfg = cfg;
    sc.seed = seed;
    sc.net = RoadNetwork(cfg.network.node_count, cfg.network.arcs, cfg.network.fcs_nodes,
                         cfg.network.hps_nodes);
    sc.supply = supply_matrix(sc.net, cfg.hps.tanker_speed_kmh, cfg.sim.delta_hours);
    sc.hps_fcs_dist = sc.net.hps_fcs_distances();
    sc.tou = cfg.tou_values.empty() ? expand_tou(cfg.tou_pattern, cfg.sim.delta_hours,
                                                 cfg.sim.steps)
                                    : cycle_tou(cfg.tou_values, cfg.sim.steps);

    const int n_hps = sc.net.num_hps();
    const int steps = cfg.sim.steps;

    // weather: explicit traces win, otherwise a seeded diurnal generator
    sc.wind_trace.assign(n_hps, std::vector<double>(steps, 0.0));
    sc.solar_trace.assign(n_hps, std::vector<double>(steps, 0.0));
    for (int k = 0; k < n_hps; ++k) {
        auto rng = detail::stream(seed, 0x77ea00 + k);
        std::normal_distribution<double> wnoise(0.0, cfg.weather.wind_noise_ms);
        std::normal_distribution<double> snoise(0.0, cfg.weather.solar_noise_w);
        const bool explicit_wind = k < static_cast<int>(cfg.weather.wind_traces.size());
        const bool explicit_solar = k < static_cast<int>(cfg.weather.solar_traces.size());
        for (int t = 0; t < steps; ++t) {
            const double hour = std::fmod(t * cfg.sim.delta_hours, 24.0);
            if (explicit_wind) {
                sc.wind_trace[k][t] = cfg.weather.wind_traces[k].at(t);
            } else {
                const double base = cfg.weather.wind_mean_ms +
                                    cfg.weather.wind_amplitude_ms *
                                        std::sin(2.0 * M_PI * (hour / 24.0 - 0.25));
                sc.wind_trace[k][t] = std::max(0.0, base + wnoise(rng));
            }
            if (explicit_solar) {
                sc.solar_trace[k][t] = cfg.weather.solar_traces[k].at(t);
            } else {
                double rad = 0.0;
                if (hour > 6.0 && hour < 18.0) {
                    const double x = (hour - 6.0) / 12.0;
                    rad = cfg.weather.solar_peak_w * std::pow(std::sin(M_PI * x), 1.3);
                    rad = std::max(0.0, rad + snoise(rng));
                }
                sc.solar_trace[k][t] = rad;
            }
        }
    }

    // request stream: inhomogeneous Poisson over the daily profile
    sc.request_schedule.assign(steps, {});
    {
        auto rng = detail::stream(seed, 0x5eed01);
        const int per_day = sc.steps_per_day();
        std::vector<double> share(per_day, 0.0);
        double total_share = 0.0;
        for (int t = 0; t < per_day; ++t) {
            const int hour = static_cast<int>(std::fmod(t * cfg.sim.delta_hours, 24.0));
            share[t] = cfg.requests.hourly_profile[hour];
            total_share += share[t];
        }
        const double day_total = cfg.requests.daily_per_ev * cfg.ev.count;
        std::uniform_int_distribution<int> node_pick(0, cfg.network.node_count - 1);
        std::uniform_real_distribution<double> soc_pick(cfg.requests.soc_min,
                                                        cfg.requests.soc_max);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int t = 0; t < steps; ++t) {
            const double lambda =
                total_share > 0.0 ? day_total * share[t % per_day] / total_share : 0.0;
            int n = 0;
            if (lambda > 0.0) n = std::poisson_distribution<int>(lambda)(rng);
            for (int q = 0; q < n; ++q) {
                RequestSpec r;
                r.node = node_pick(rng);
                r.soc = soc_pick(rng);
                r.loaded = unit(rng) < cfg.requests.loaded_probability;
                if (r.loaded) {
                    r.destination = node_pick(rng);
                    if (r.destination == r.node)
                        r.destination = (r.destination + 1) % cfg.network.node_count;
                }
                sc.request_schedule[t].push_back(r);
            }
        }
    }

    // fleet spawn points
    {
        auto rng = detail::stream(seed, 0xf1ee7);
        std::uniform_int_distribution<int> node_pick(0, cfg.network.node_count - 1);
        sc.ev_initial_node.resize(cfg.ev.count);
        for (int j = 0; j < cfg.ev.count; ++j) sc.ev_initial_node[j] = node_pick(rng);
    }
    return sc;
}

// ---- JSON config loading ------------------------------------------------

namespace detail {

using json = nlohmann::json;

template <typename T>
void read_field(const json& j, const std::string& path, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("config: bad value at " + path + "." + key);
    }
}

inline void read_piles(const json& j, const std::string& path, std::vector<int>& out,
                       std::size_t n_fcs) {
    if (!j.contains("piles")) return;
    const auto& v = j.at("piles");
    if (v.is_number()) {
        out.assign(std::max<std::size_t>(n_fcs, 1), v.get<int>());
    } else if (v.is_array()) {
        out = v.get<std::vector<int>>();
    } else {
        throw std::invalid_argument("config: bad value at " + path + ".piles");
    }
}

} // namespace detail

inline ScenarioConfig parse_config(const nlohmann::json& j) {
    using detail::read_field;
    ScenarioConfig c = default_config();
    if (j.contains("network")) {
        const auto& n = j.at("network");
        NetworkConfig net;
        read_field(n, "network", "node_count", net.node_count);
        if (n.contains("arcs")) {
            for (const auto& arc : n.at("arcs")) {
                if (!arc.is_array() || arc.size() != 3)
                    throw std::invalid_argument("config: network.arcs entries must be [a,b,km]");
                net.arcs.push_back({arc[0].get<int>(), arc[1].get<int>(), arc[2].get<double>()});
            }
        }
        read_field(n, "network", "fcs_nodes", net.fcs_nodes);
        read_field(n, "network", "hps_nodes", net.hps_nodes);
        if (net.node_count > 0) {
            c.network = net;
            c.fcs.piles.assign(net.fcs_nodes.size(), 8);
        }
    }
    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        read_field(s, "sim", "delta_hours", c.sim.delta_hours);
        read_field(s, "sim", "steps", c.sim.steps);
        read_field(s, "sim", "epsilon", c.sim.epsilon);
        read_field(s, "sim", "max_iterations", c.sim.max_iterations);
        read_field(s, "sim", "drop_unserved", c.sim.drop_unserved);
    }
    if (j.contains("ev")) {
        const auto& e = j.at("ev");
        read_field(e, "ev", "count", c.ev.count);
        read_field(e, "ev", "capacity_kwh", c.ev.capacity_kwh);
        read_field(e, "ev", "speed_kmh", c.ev.speed_kmh);
    }
    if (j.contains("costs")) {
        const auto& k = j.at("costs");
        read_field(k, "costs", "wait_per_hour", c.costs.wait_per_hour);
        read_field(k, "costs", "idle_per_hour", c.costs.idle_per_hour);
        read_field(k, "costs", "depreciation_per_km", c.costs.depreciation_per_km);
        read_field(k, "costs", "fcs_maintenance_per_kw", c.costs.fcs_maint_per_kw);
        read_field(k, "costs", "loss_kwh_per_km", c.costs.loss_kwh_per_km);
        read_field(k, "costs", "charge_efficiency", c.costs.charge_efficiency);
        read_field(k, "costs", "gamma", c.costs.gamma);
        read_field(k, "costs", "power_noload_kw", c.costs.rates.noload_kw);
        read_field(k, "costs", "power_loaded_kw", c.costs.rates.loaded_kw);
    }
    if (j.contains("fcs")) {
        const auto& f = j.at("fcs");
        detail::read_piles(f, "fcs", c.fcs.piles, c.network.fcs_nodes.size());
        read_field(f, "fcs", "base_load_kw", c.fcs.base_load_kw);
        read_field(f, "fcs", "demand_prior_kwh", c.fcs.demand_prior_kwh);
        read_field(f, "fcs", "ewma_window", c.fcs.ewma_window);
        read_field(f, "fcs", "ewma_decay", c.fcs.ewma_decay);
    }
    if (j.contains("hps")) {
        const auto& h = j.at("hps");
        if (h.contains("wind")) {
            const auto& w = h.at("wind");
            read_field(w, "hps.wind", "turbines", c.hps.wind.n_turbines);
            read_field(w, "hps.wind", "capacity_kw", c.hps.wind.capacity_kw);
            read_field(w, "hps.wind", "v_rated", c.hps.wind.v_rated);
            read_field(w, "hps.wind", "v_cutin", c.hps.wind.v_cutin);
            read_field(w, "hps.wind", "v_cutout", c.hps.wind.v_cutout);
        }
        if (h.contains("pv")) {
            const auto& v = h.at("pv");
            read_field(v, "hps.pv", "capacity_kw", c.hps.pv.capacity_kw);
            read_field(v, "hps.pv", "inverter_efficiency", c.hps.pv.inverter_eff);
            read_field(v, "hps.pv", "rated_radiation_w", c.hps.pv.rated_radiation_w);
        }
        if (h.contains("chain")) {
            const auto& ch = h.at("chain");
            read_field(ch, "hps.chain", "faraday_efficiency", c.hps.chain.faraday_eff);
            read_field(ch, "hps.chain", "electrolyzers", c.hps.chain.n_electrolyzers);
            read_field(ch, "hps.chain", "electrolyzer_voltage", c.hps.chain.electrolyzer_voltage);
            read_field(ch, "hps.chain", "faraday_constant", c.hps.chain.faraday_constant);
            read_field(ch, "hps.chain", "gas_constant", c.hps.chain.gas_constant);
            read_field(ch, "hps.chain", "temperature_k", c.hps.chain.temperature_k);
            read_field(ch, "hps.chain", "pressure_pa", c.hps.chain.pressure_pa);
            read_field(ch, "hps.chain", "fuelcell_voltage", c.hps.chain.fuelcell_voltage);
            read_field(ch, "hps.chain", "power_coefficient", c.hps.chain.power_coefficient);
        }
        read_field(h, "hps", "base_load_kw", c.hps.base_load_kw);
        read_field(h, "hps", "maintenance_wind_per_kw", c.hps.maint_wind_per_kw);
        read_field(h, "hps", "maintenance_pv_per_kw", c.hps.maint_pv_per_kw);
        read_field(h, "hps", "delivery_per_kw", c.hps.delivery_per_kw);
        read_field(h, "hps", "tanker_speed_kmh", c.hps.tanker_speed_kmh);
    }
    if (j.contains("requests")) {
        const auto& r = j.at("requests");
        read_field(r, "requests", "daily_per_ev", c.requests.daily_per_ev);
        read_field(r, "requests", "hourly_profile", c.requests.hourly_profile);
        read_field(r, "requests", "soc_min", c.requests.soc_min);
        read_field(r, "requests", "soc_max", c.requests.soc_max);
        read_field(r, "requests", "loaded_probability", c.requests.loaded_probability);
    }
    if (j.contains("tou")) {
        const auto& t = j.at("tou");
        if (t.contains("pattern")) {
            c.tou_pattern.clear();
            for (const auto& row : t.at("pattern")) {
                if (!row.is_array() || row.size() != 2)
                    throw std::invalid_argument("config: tou.pattern entries must be [hour, price]");
                c.tou_pattern.emplace_back(row[0].get<int>(), row[1].get<double>());
            }
        }
        read_field(t, "tou", "values", c.tou_values);
    }
    if (j.contains("weather")) {
        const auto& w = j.at("weather");
        read_field(w, "weather", "wind_mean_ms", c.weather.wind_mean_ms);
        read_field(w, "weather", "wind_amplitude_ms", c.weather.wind_amplitude_ms);
        read_field(w, "weather", "wind_noise_ms", c.weather.wind_noise_ms);
        read_field(w, "weather", "solar_peak_w", c.weather.solar_peak_w);
        read_field(w, "weather", "solar_noise_w", c.weather.solar_noise_w);
        read_field(w, "weather", "wind_traces", c.weather.wind_traces);
        read_field(w, "weather", "solar_traces", c.weather.solar_traces);
    }
    c.validate();
    return c;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: invalid JSON in " + path + ": " + e.what());
    }
    return parse_config(j);
}

} // namespace hycharge
