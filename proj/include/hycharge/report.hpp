#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hycharge/horizon.hpp"

namespace hycharge {

namespace detail {
inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}
} // namespace detail

/// One row per step plus a totals row; stable formatting so identical runs
/// produce identical bytes.
inline void write_report_csv(const RunReport& r, std::ostream& os) {
    os << "step,requests,served,deferred,unserved,iterations,converged,charge,wait,idle,"
          "depreciation,fcs_maint,hps_maint,delivery,penalty,total\n";
    auto row = [&os](const std::string& label, int requests, int served, int deferred,
                     int unserved, int iterations, bool converged, const CostBreakdown& c) {
        os << label << ',' << requests << ',' << served << ',' << deferred << ',' << unserved
           << ',' << iterations << ',' << (converged ? 1 : 0) << ',' << detail::fixed6(c.charge)
           << ',' << detail::fixed6(c.wait) << ',' << detail::fixed6(c.idle) << ','
           << detail::fixed6(c.depreciation) << ',' << detail::fixed6(c.fcs_maint) << ','
           << detail::fixed6(c.hps_maint) << ',' << detail::fixed6(c.delivery) << ','
           << detail::fixed6(c.penalty) << ',' << detail::fixed6(c.total) << '\n';
    };
    int requests = 0, served = 0, deferred = 0, iterations = 0;
    for (const StepRecord& s : r.steps) {
        row(std::to_string(s.step), s.requests, s.served, s.deferred, s.cost.unserved,
            s.iterations, s.converged, s.cost);
        requests += s.requests;
        served += s.served;
        deferred += s.deferred;
        iterations += s.iterations;
    }
    row("total", requests, served, deferred, r.totals.unserved, iterations, r.all_converged,
        r.totals);
}

inline nlohmann::json report_to_json(const RunReport& r) {
    auto cost_json = [](const CostBreakdown& c) {
        return nlohmann::json{{"charge", c.charge},
                              {"wait", c.wait},
                              {"idle", c.idle},
                              {"depreciation", c.depreciation},
                              {"fcs_maint", c.fcs_maint},
                              {"hps_maint", c.hps_maint},
                              {"delivery", c.delivery},
                              {"penalty", c.penalty},
                              {"total", c.total},
                              {"unserved", c.unserved}};
    };
    nlohmann::json steps = nlohmann::json::array();
    for (const StepRecord& s : r.steps) {
        steps.push_back({{"step", s.step},
                         {"requests", s.requests},
                         {"served", s.served},
                         {"deferred", s.deferred},
                         {"iterations", s.iterations},
                         {"converged", s.converged},
                         {"cost", cost_json(s.cost)}});
    }
    return nlohmann::json{{"strategy", r.strategy},
                          {"seed", r.seed},
                          {"totals", cost_json(r.totals)},
                          {"request_events", r.request_events},
                          {"unique_requests", r.unique_requests},
                          {"unique_served", r.unique_served},
                          {"skipped_no_vehicle", r.skipped_no_vehicle},
                          {"service_rate", r.service_rate},
                          {"mean_iterations", r.mean_iterations},
                          {"all_converged", r.all_converged},
                          {"steps", steps}};
}

inline std::string report_basename(const RunReport& r) {
    return "run_" + r.strategy + "_seed" + std::to_string(r.seed);
}

inline void save_report(const RunReport& r, const std::string& out_dir) {
    const std::string base = out_dir + "/" + report_basename(r);
    {
        std::ofstream csv(base + ".csv", std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write " + base + ".csv");
        write_report_csv(r, csv);
    }
    {
        std::ofstream js(base + ".json", std::ios::binary);
        if (!js) throw std::runtime_error("cannot write " + base + ".json");
        js << report_to_json(r).dump(2) << '\n';
    }
}

/// Convergence trace rows: one line per recorded half-round pair.
inline void write_traces_csv(const std::vector<StepRecord>& steps, std::ostream& os) {
    os << "step,iteration,j_initial,j_after_matching,j_after_dispatch\n";
    for (const StepRecord& s : steps) {
        for (std::size_t it = 0; it < s.trace.rounds.size(); ++it) {
            os << s.step << ',' << (it + 1) << ','
               << (it == 0 ? detail::fixed6(s.trace.initial_j) : std::string()) << ','
               << detail::fixed6(s.trace.rounds[it].j_after_matching) << ','
               << detail::fixed6(s.trace.rounds[it].j_after_dispatch) << '\n';
        }
    }
}

/// Strategy comparison in the shape of the usual results table: mean cost
/// per category over the seed batch plus the standard deviation of totals.
struct SummaryRow {
    std::string strategy;
    CostBreakdown mean;
    double mean_unserved = 0.0;
    double total_std = 0.0;
    double service_rate = 0.0;
    double mean_iterations = 0.0;
};

inline SummaryRow summarize(const std::vector<RunReport>& runs) {
    if (runs.empty()) throw std::invalid_argument("summarize: need at least one run");
    SummaryRow row;
    row.strategy = runs.front().strategy;
    for (const RunReport& r : runs) {
        CostBreakdown c = r.totals;
        row.mean += c;
        row.mean_unserved += r.totals.unserved;  // per-step events, matches the penalty line
        row.service_rate += r.service_rate;
        row.mean_iterations += r.mean_iterations;
    }
    const double n = static_cast<double>(runs.size());
    row.mean.charge /= n;
    row.mean.wait /= n;
    row.mean.idle /= n;
    row.mean.depreciation /= n;
    row.mean.fcs_maint /= n;
    row.mean.hps_maint /= n;
    row.mean.delivery /= n;
    row.mean.penalty /= n;
    row.mean.total /= n;
    row.mean_unserved /= n;
    row.service_rate /= n;
    row.mean_iterations /= n;
    double var = 0.0;
    for (const RunReport& r : runs) {
        const double d = r.totals.total - row.mean.total;
        var += d * d;
    }
    row.total_std = runs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    return row;
}

inline void print_summary_table(const std::vector<SummaryRow>& rows, std::ostream& os) {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%-12s %12s %12s %12s %12s %10s %9s %10s %10s %10s %12s %10s\n",
                  "Strategy", "Charge", "Wait", "Idle", "Deprec.", "Penalty", "Unserved",
                  "FCS_maint", "HPS_maint", "Delivery", "Total", "Std");
    os << buf;
    for (const SummaryRow& r : rows) {
        std::snprintf(buf, sizeof(buf),
                      "%-12s %12.1f %12.1f %12.1f %12.1f %10.1f %9.1f %10.1f %10.1f %10.1f %12.1f "
                      "%10.1f\n",
                      r.strategy.c_str(), r.mean.charge, r.mean.wait, r.mean.idle,
                      r.mean.depreciation, r.mean.penalty, r.mean_unserved, r.mean.fcs_maint,
                      r.mean.hps_maint, r.mean.delivery, r.mean.total, r.total_std);
        os << buf;
    }
}

} // namespace hycharge
