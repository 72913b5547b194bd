#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hycharge/oracle.hpp"
#include "hycharge/report.hpp"

namespace hycharge {

struct BatchOptions {
    std::string config_path;
    std::vector<std::uint64_t> seeds{1};
    std::vector<std::string> strategies;  // empty = all six
    std::string out_dir = "out";
    bool random_init = false;
};

inline ScenarioConfig batch_config(const BatchOptions& opt) {
    return opt.config_path.empty() ? default_config() : load_config(opt.config_path);
}

inline std::vector<Strategy> batch_strategies(const BatchOptions& opt) {
    std::vector<Strategy> list;
    if (opt.strategies.empty()) return all_strategies();
    for (const std::string& name : opt.strategies) list.push_back(parse_strategy(name));
    return list;
}

/// run: execute every (strategy, seed) cell, persist reports, print the
/// comparison table.
inline int cmd_run(const BatchOptions& opt, std::ostream& os = std::cout) {
    const ScenarioConfig cfg = batch_config(opt);
    std::filesystem::create_directories(opt.out_dir);
    const std::vector<Strategy> strategies = batch_strategies(opt);
    EngineOptions eopt;
    eopt.random_init = opt.random_init;
    eopt.warnings = &std::cerr;

    std::map<std::string, std::vector<RunReport>> by_strategy;
    for (std::uint64_t seed : opt.seeds) {
        const Scenario sc = generate_scenario(cfg, seed);
        for (Strategy s : strategies) {
            RunReport rep = run_horizon(sc, s, seed, eopt);
            save_report(rep, opt.out_dir);
            by_strategy[rep.strategy].push_back(std::move(rep));
        }
    }
    std::vector<SummaryRow> rows;
    for (Strategy s : strategies) rows.push_back(summarize(by_strategy.at(to_string(s))));
    print_summary_table(rows, os);
    for (const SummaryRow& r : rows)
        os << r.strategy << ": service rate " << detail::fixed6(r.service_rate)
           << ", mean iterations " << detail::fixed6(r.mean_iterations) << '\n';
    return 0;
}

enum class SweepAxis { Piles, Battery, Speed, Penalty };

inline SweepAxis parse_axis(const std::string& name) {
    if (name == "piles") return SweepAxis::Piles;
    if (name == "battery") return SweepAxis::Battery;
    if (name == "speed") return SweepAxis::Speed;
    if (name == "penalty") return SweepAxis::Penalty;
    throw std::invalid_argument("unknown sweep axis: " + name +
                                " (expected piles|battery|speed|penalty)");
}

inline ScenarioConfig apply_axis(ScenarioConfig cfg, SweepAxis axis, double value) {
    switch (axis) {
        case SweepAxis::Piles:
            cfg.fcs.piles.assign(cfg.network.fcs_nodes.size(), static_cast<int>(value));
            break;
        case SweepAxis::Battery: cfg.ev.capacity_kwh = value; break;
        case SweepAxis::Speed: cfg.ev.speed_kmh = value; break;
        case SweepAxis::Penalty: cfg.costs.gamma = value; break;
    }
    return cfg;
}

struct SweepCell {
    double value = 0.0;
    SummaryRow summary;
};

/// sweep: rerun the whole comparison per axis value, one output directory
/// per value plus a flat summary file.
inline int cmd_sweep(const BatchOptions& opt, const std::string& axis_name,
                     const std::vector<double>& values, std::ostream& os = std::cout) {
    if (values.empty()) throw std::invalid_argument("sweep: need at least one value");
    const SweepAxis axis = parse_axis(axis_name);
    const ScenarioConfig base = batch_config(opt);
    const std::vector<Strategy> strategies = batch_strategies(opt);
    std::filesystem::create_directories(opt.out_dir);
    std::ofstream summary_csv(opt.out_dir + "/sweep_" + axis_name + ".csv", std::ios::binary);
    summary_csv << "axis,value,strategy,total_mean,total_std,service_rate,charge,wait,idle,"
                   "depreciation,penalty,fcs_maint,hps_maint,delivery\n";

    for (double value : values) {
        const ScenarioConfig cfg = apply_axis(base, axis, value);
        BatchOptions cell = opt;
        cell.out_dir = opt.out_dir + "/" + axis_name + "_" + detail::fixed6(value);
        std::filesystem::create_directories(cell.out_dir);
        std::map<std::string, std::vector<RunReport>> by_strategy;
        EngineOptions eopt;
        eopt.random_init = opt.random_init;
        eopt.warnings = &std::cerr;
        for (std::uint64_t seed : opt.seeds) {
            const Scenario sc = generate_scenario(cfg, seed);
            for (Strategy s : strategies) {
                RunReport rep = run_horizon(sc, s, seed, eopt);
                save_report(rep, cell.out_dir);
                by_strategy[rep.strategy].push_back(std::move(rep));
            }
        }
        os << axis_name << " = " << value << '\n';
        std::vector<SummaryRow> rows;
        for (Strategy s : strategies) rows.push_back(summarize(by_strategy.at(to_string(s))));
        print_summary_table(rows, os);
        for (const SummaryRow& r : rows) {
            summary_csv << axis_name << ',' << detail::fixed6(value) << ',' << r.strategy << ','
                        << detail::fixed6(r.mean.total) << ',' << detail::fixed6(r.total_std)
                        << ',' << detail::fixed6(r.service_rate) << ','
                        << detail::fixed6(r.mean.charge) << ',' << detail::fixed6(r.mean.wait)
                        << ',' << detail::fixed6(r.mean.idle) << ','
                        << detail::fixed6(r.mean.depreciation) << ','
                        << detail::fixed6(r.mean.penalty) << ','
                        << detail::fixed6(r.mean.fcs_maint) << ','
                        << detail::fixed6(r.mean.hps_maint) << ','
                        << detail::fixed6(r.mean.delivery) << '\n';
        }
    }
    return 0;
}

/// convergence: bi-level trace tables plus aggregate iteration statistics;
/// any non-monotone trace fails the command.
inline int cmd_convergence(const BatchOptions& opt, std::ostream& os = std::cout) {
    const ScenarioConfig cfg = batch_config(opt);
    std::filesystem::create_directories(opt.out_dir);
    EngineOptions eopt;
    eopt.random_init = opt.random_init;
    eopt.warnings = &std::cerr;
    bool all_ok = true;
    double iter_sum = 0.0;
    long iter_count = 0;
    double wall_sum = 0.0;
    long step_count = 0;
    for (std::uint64_t seed : opt.seeds) {
        const Scenario sc = generate_scenario(cfg, seed);
        const RunReport rep = run_horizon(sc, Strategy::BiBbg, seed, eopt);
        std::ofstream trace(opt.out_dir + "/trace_seed" + std::to_string(seed) + ".csv",
                            std::ios::binary);
        write_traces_csv(rep.steps, trace);
        for (const StepRecord& s : rep.steps) {
            const Verdict v = check_monotone_trace(s.trace);
            if (!v.pass) {
                os << "seed " << seed << " step " << s.step << ": " << v.witness << '\n';
                all_ok = false;
            }
            iter_sum += s.iterations;
            ++iter_count;
        }
        wall_sum += rep.wall_seconds;
        step_count += static_cast<long>(rep.steps.size());
    }
    os << "traces: " << (all_ok ? "all monotone" : "violations found") << '\n';
    if (iter_count > 0) os << "mean iterations: " << detail::fixed6(iter_sum / iter_count) << '\n';
    if (step_count > 0)
        os << "mean wall time per step: " << detail::fixed6(wall_sum / step_count) << " s\n";
    return all_ok ? 0 : 1;
}

struct VerifyOptions {
    int instances = 500;
    std::uint64_t seed = 42;
    InstanceLimits limits;
};

/// verify: the oracle suite. Joint-optimum equivalence of the alternation
/// and the serve-more-is-cheaper property at the penalty bound.
inline int cmd_verify(const VerifyOptions& vopt, std::ostream& os = std::cout) {
    std::mt19937_64 rng(vopt.seed);
    int equiv_fail = 0, priority_fail = 0;
    double worst_gap = 0.0;
    for (int n = 0; n < vopt.instances; ++n) {
        const SmallInstance inst = random_small_instance(rng, vopt.limits);
        const JointOptimum ref = enumerate_joint_optimum(inst);
        OptimizeOptions o;
        o.epsilon = 1e-9;
        o.max_iterations = 200;
        const StepDecision got = optimize_step(inst.problem, o);
        const double gap = got.cost.total - ref.j;
        worst_gap = std::max(worst_gap, std::abs(gap));
        if (std::abs(gap) > 1e-6) {
            equiv_fail += 1;
            if (equiv_fail <= 3) {
                os << "instance " << n << ": alternation " << got.cost.total << " vs optimum "
                   << ref.j << '\n';
                dump_instance(inst, os);
            }
        }
    }
    InstanceLimits priority_limits = vopt.limits;
    priority_limits.min_requests = 2;
    priority_limits.min_slots = 2;
    std::mt19937_64 rng2(vopt.seed + 1);
    for (int n = 0; n < vopt.instances; ++n) {
        const SmallInstance inst = random_small_instance(rng2, priority_limits);
        const Verdict v = check_service_priority(inst, gamma_bound(inst.problem));
        if (!v.pass) {
            priority_fail += 1;
            if (priority_fail <= 3) {
                os << "instance " << n << ": " << v.witness << '\n';
                dump_instance(inst, os);
            }
        }
    }
    os << "joint optimum equivalence: " << (vopt.instances - equiv_fail) << "/" << vopt.instances
       << " (worst gap " << worst_gap << ")\n";
    os << "service-priority property: " << (vopt.instances - priority_fail) << "/"
       << vopt.instances << '\n';
    return equiv_fail == 0 && priority_fail == 0 ? 0 : 1;
}

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"joint EV charging and hydrogen dispatch simulator"};
    app.require_subcommand(1);

    BatchOptions batch;
    std::string axis;
    std::vector<double> values;
    VerifyOptions vopt;

    auto add_batch_flags = [&](CLI::App* cmd) {
        cmd->add_option("--config", batch.config_path, "scenario config (JSON)");
        cmd->add_option("--seeds", batch.seeds, "seeds to run")->delimiter(',');
        cmd->add_option("--strategies", batch.strategies, "strategies to run")->delimiter(',');
        cmd->add_option("--out", batch.out_dir, "output directory");
        cmd->add_flag("--random-init", batch.random_init,
                      "random feasible starting point per step");
    };

    CLI::App* run = app.add_subcommand("run", "run the strategy comparison");
    add_batch_flags(run);
    CLI::App* sweep = app.add_subcommand("sweep", "rerun the comparison over a parameter axis");
    add_batch_flags(sweep);
    sweep->add_option("--axis", axis, "piles|battery|speed|penalty")->required();
    sweep->add_option("--values", values, "axis values")->required()->delimiter(',');
    CLI::App* conv = app.add_subcommand("convergence", "emit per-step iteration traces");
    add_batch_flags(conv);
    CLI::App* verify = app.add_subcommand("verify", "run the exhaustive verification suite");
    verify->add_option("--instances", vopt.instances, "instances per check");
    verify->add_option("--seed", vopt.seed, "rng seed");
    verify->add_option("--max-ev", vopt.limits.max_requests, "max requests per instance");
    verify->add_option("--max-fcs", vopt.limits.max_fcs, "max stations per instance");
    verify->add_option("--max-hps", vopt.limits.max_hps, "max plants per instance");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(batch);
        if (sweep->parsed()) return cmd_sweep(batch, axis, values);
        if (conv->parsed()) return cmd_convergence(batch);
        if (verify->parsed()) return cmd_verify(vopt);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace hycharge
