#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace hycharge {

struct WindParams {
    int n_turbines = 1;
    double capacity_kw = 2200.0;
    double v_rated = 12.0;   // m/s
    double v_cutin = 2.5;    // m/s
    double v_cutout = 22.0;  // m/s

    void validate() const {
        if (!(0.0 < v_cutin && v_cutin < v_rated && v_rated < v_cutout))
            throw std::invalid_argument("wind: need 0 < cut-in < rated < cut-out speed");
        if (capacity_kw <= 0.0 || n_turbines <= 0)
            throw std::invalid_argument("wind: capacity and turbine count must be positive");
    }
};

struct PvParams {
    double capacity_kw = 1000.0;
    double inverter_eff = 0.88;      // fraction of DC reaching the AC bus
    double rated_radiation_w = 800.0;

    void validate() const {
        if (capacity_kw <= 0.0 || rated_radiation_w <= 0.0)
            throw std::invalid_argument("pv: capacity and rated radiation must be positive");
        if (inverter_eff <= 0.0 || inverter_eff > 1.0)
            throw std::invalid_argument("pv: inverter efficiency must be in (0,1]");
    }
};

// Electrolyzer -> cylinder -> fuel cell chain. The chain collapses to one
// linear coefficient from surplus power to hydrogen-equivalent power; the
// coefficient can also be set directly (power_coefficient >= 0 overrides).
struct HydrogenChainParams {
    double faraday_eff = 0.98;
    int n_electrolyzers = 8;
    double electrolyzer_voltage = 60.0;   // V
    double faraday_constant = 96485.34;   // C/mol
    double gas_constant = 8.314;          // J/(mol K)
    double temperature_k = 300.0;
    double pressure_pa = 15.0e6;
    double fuelcell_voltage = 400.0;      // V
    double power_coefficient = -1.0;      // < 0: derive from the chain above

    void validate() const {
        if (faraday_eff <= 0.0 || faraday_eff > 1.0)
            throw std::invalid_argument("hydrogen: faraday efficiency must be in (0,1]");
        if (n_electrolyzers <= 0 || electrolyzer_voltage <= 0.0 || faraday_constant <= 0.0 ||
            gas_constant <= 0.0 || temperature_k <= 0.0 || pressure_pa <= 0.0 ||
            fuelcell_voltage <= 0.0)
            throw std::invalid_argument("hydrogen: chain parameters must be positive");
    }

    double net_coefficient() const {
        if (power_coefficient >= 0.0) return power_coefficient;
        // moles/s per kW in, cylinder volume, fuel cell current and power back out
        const double moles = faraday_eff * n_electrolyzers /
                             (2.0 * electrolyzer_voltage * faraday_constant);
        const double volume = moles * gas_constant * temperature_k / pressure_pa;
        const double current = 2.0 * volume * faraday_constant;
        return current * fuelcell_voltage;
    }
};

struct HpsState {
    WindParams wind;
    PvParams pv;
    HydrogenChainParams chain;
    double base_load_kw = 400.0;
    double maint_wind_per_kw = 0.018;  // CNY/kW
    double maint_pv_per_kw = 0.018;    // CNY/kW
    double delivery_per_kw = 0.04;     // CNY/kW
    double p_hydrogen_kw = 0.0;        // refreshed each step

    void validate() const {
        wind.validate();
        pv.validate();
        chain.validate();
        if (base_load_kw < 0.0 || maint_wind_per_kw < 0.0 || maint_pv_per_kw < 0.0 ||
            delivery_per_kw < 0.0)
            throw std::invalid_argument("hps: loads and unit costs must be nonnegative");
    }
};

/// Turbine output for a given wind speed. Flat at capacity between rated and
/// cut-out, cubic between cut-in and rated, zero otherwise (the curve jumps
/// at cut-in and meets the plateau exactly at rated speed).
inline double wind_power(double v_ms, const WindParams& p) {
    if (v_ms < 0.0) throw std::invalid_argument("wind_power: speed must be nonnegative");
    const double full = p.n_turbines * p.capacity_kw;
    if (v_ms >= p.v_rated && v_ms <= p.v_cutout) return full;
    if (v_ms >= p.v_cutin && v_ms <= p.v_rated) {
        const double x = v_ms / p.v_rated;
        return full * x * x * x;
    }
    return 0.0;
}

/// PV output, linear in radiation.
inline double pv_power(double radiation_w, const PvParams& p) {
    if (radiation_w < 0.0) throw std::invalid_argument("pv_power: radiation must be nonnegative");
    return p.capacity_kw * p.inverter_eff * (radiation_w / p.rated_radiation_w);
}

/// Hydrogen-equivalent power available for dispatch this step. Generation
/// below the plant base load yields zero (no negative production).
inline double hydrogen_power(double v_wind_ms, double radiation_w, const HpsState& hps) {
    const double surplus = std::max(
        0.0, wind_power(v_wind_ms, hps.wind) + pv_power(radiation_w, hps.pv) - hps.base_load_kw);
    return hps.chain.net_coefficient() * surplus;
}

/// Per-step operating cost of one plant: turbine and PV maintenance plus
/// tanker delivery of whatever was dispatched.
inline double hps_cost(const HpsState& hps, double p_wind_kw, double p_pv_kw,
                       const std::vector<double>& dispatched_row_kw) {
    double shipped = 0.0;
    for (double h : dispatched_row_kw) {
        if (h < 0.0) throw std::invalid_argument("hps_cost: dispatched power must be nonnegative");
        shipped += h;
    }
    return hps.maint_wind_per_kw * p_wind_kw + hps.maint_pv_per_kw * p_pv_kw +
           hps.delivery_per_kw * shipped;
}

} // namespace hycharge
