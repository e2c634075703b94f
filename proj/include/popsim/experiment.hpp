#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "popsim/adversary.hpp"
#include "popsim/analysis.hpp"
#include "popsim/engine.hpp"
#include "popsim/errors.hpp"
#include "popsim/io.hpp"
#include "popsim/oracle.hpp"
#include "popsim/protocols/registry.hpp"

namespace popsim {

// Default run horizons, sized so the expected completion fits with a wide
// margin: cai needs Theta(n^3) interactions, the reset pipeline of the
// bounded protocols Theta(n log n), the linear-state fill-in Theta(n^2 log n).
inline std::uint64_t default_horizon(ProtocolId protocol, int n) {
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t log_n = static_cast<std::uint64_t>(Params::effective_log(n));
    switch (protocol) {
        case ProtocolId::cai: return 12 * un * un * un;
        case ProtocolId::linear_time: return 20 * un * un + 800 * un * log_n;
        case ProtocolId::linear_state: return 12 * un * un * log_n + 800 * un * log_n;
        case ProtocolId::log_time: return 60 * un * log_n;
        case ProtocolId::obs: return 2000 * un;
    }
    throw InvalidArgumentError("unknown protocol id");
}

struct ParamOverrides {
    std::optional<std::uint64_t> name_space;
    std::optional<std::uint64_t> max_interactions;
    std::optional<std::uint64_t> tail_margin;

    Params build(ProtocolId protocol, int n) const {
        Params p = Params::make(n);
        if (name_space) p.name_space = *name_space;
        p.max_interactions = max_interactions ? *max_interactions
                                              : default_horizon(protocol, n);
        if (tail_margin) p.tail_margin = *tail_margin;
        p.validate();
        return p;
    }
};

// One seeded trial: generate the initial configuration, then run. All
// randomness comes from the (master seed, n, trial) substream.
inline RunMetrics run_trial(ProtocolId protocol, InitKind kind, int n,
                            const ParamOverrides& overrides, std::uint64_t master_seed,
                            std::uint64_t trial) {
    const Params p = overrides.build(protocol, n);
    RngStream rng = RngStream::derive(master_seed, static_cast<std::uint64_t>(n), trial);
    return dispatch_protocol(protocol, [&](auto tag) {
        using P = decltype(tag);
        auto config = generate_initial<P>(kind, p, rng);
        return run<P>(std::move(config), p, rng, RunOptions{}).metrics;
    });
}

// Trials are independent; a small worker pool executes them with per-trial
// substreams and results land in trial order regardless of completion order.
inline std::vector<RunMetrics> run_trials(ProtocolId protocol, InitKind kind, int n,
                                          int trials, const ParamOverrides& overrides,
                                          std::uint64_t master_seed, int jobs = 1) {
    std::vector<RunMetrics> results(static_cast<std::size_t>(trials));
    if (jobs <= 1) {
        for (int t = 0; t < trials; ++t)
            results[static_cast<std::size_t>(t)] =
                run_trial(protocol, kind, n, overrides, master_seed,
                          static_cast<std::uint64_t>(t));
        return results;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const int t = next.fetch_add(1);
                if (t >= trials) return;
                results[static_cast<std::size_t>(t)] =
                    run_trial(protocol, kind, n, overrides, master_seed,
                              static_cast<std::uint64_t>(t));
            }
        });
    }
    for (auto& w : workers) w.join();
    return results;
}

// ---------------------------------------------------------------------------
// Experiment specification and execution (the CLI's core).

enum class Command { run, sweep, baseline, verify };

struct ExperimentSpec {
    Command command = Command::run;
    ProtocolId protocol = ProtocolId::cai;
    InitKind init = InitKind::uniform_random;
    std::vector<int> ns;
    int trials = 1;
    std::uint64_t seed = 0;
    ParamOverrides overrides;
    OutputFormat format = OutputFormat::csv;
    std::string out_path; // empty = stdout
    int jobs = 1;
    std::string baseline_kind = "both"; // epidemic | rollcall | both

    void validate() const {
        if (ns.empty()) throw InvalidArgumentError("at least one population size is required");
        if (trials < 1) throw InvalidArgumentError("trials must be >= 1");
        if (jobs < 1) throw InvalidArgumentError("jobs must be >= 1");
        for (int n : ns)
            if (n < 2) throw InvalidArgumentError("population size must be at least 2");
        if (command == Command::sweep) {
            for (std::size_t i = 1; i < ns.size(); ++i)
                if (ns[i] <= ns[i - 1])
                    throw InvalidArgumentError("sweep requires a strictly increasing n list");
        }
        if (baseline_kind != "both" && baseline_kind != "epidemic" &&
            baseline_kind != "rollcall")
            throw InvalidArgumentError("baseline kind must be epidemic, rollcall or both");
    }
};

namespace detail {

inline Cell opt_cell(const std::optional<std::uint64_t>& v) {
    if (v) return Cell(*v);
    return Cell(std::monostate{});
}

inline Row metrics_row(const ExperimentSpec& spec, int n, std::uint64_t trial,
                       const RunMetrics& m) {
    return Row{
        {"protocol", std::string(protocol_name(spec.protocol))},
        {"n", static_cast<std::int64_t>(n)},
        {"init", std::string(init_kind_name(spec.init))},
        {"seed", spec.seed},
        {"trial", trial},
        {"interactions", m.interactions},
        {"parallel_time", m.parallel_time()},
        {"silence_interaction", opt_cell(m.silence_interaction)},
        {"convergence_interaction", opt_cell(m.convergence_interaction)},
        {"timed_out", m.timed_out},
        {"reset_triggers", m.reset_triggers},
    };
}

inline const std::vector<std::string>& metrics_header() {
    static const std::vector<std::string> header{
        "protocol", "n",       "init",
        "seed",     "trial",   "interactions",
        "parallel_time",       "silence_interaction",
        "convergence_interaction", "timed_out", "reset_triggers"};
    return header;
}

// Completion metric for the sweep fit: silence for silent protocols,
// hindsight convergence for log_time.
inline std::optional<std::uint64_t> completion_interaction(ProtocolId protocol,
                                                           const RunMetrics& m) {
    if (protocol == ProtocolId::log_time) return m.convergence_interaction;
    return m.silence_interaction;
}

} // namespace detail

// Fits log(mean parallel completion time) against log n over the sweep's
// per-n means; re-derivable from the emitted rows.
struct SweepSummary {
    std::string metric;
    std::vector<std::pair<int, double>> per_n_means; // (n, mean parallel time)
    std::vector<int> trials_used;
    ScalingFit fit;

    nlohmann::json to_json() const {
        nlohmann::json points = nlohmann::json::array();
        for (std::size_t i = 0; i < per_n_means.size(); ++i) {
            points.push_back({{"n", per_n_means[i].first},
                              {"mean_parallel_time", per_n_means[i].second},
                              {"trials_used", trials_used[i]}});
        }
        return nlohmann::json{{"metric", metric},
                              {"points", points},
                              {"slope", fit.slope},
                              {"intercept", fit.intercept},
                              {"r_squared", fit.r_squared}};
    }
};

inline SweepSummary summarize_sweep(ProtocolId protocol,
                                    const std::vector<int>& ns,
                                    const std::vector<std::vector<RunMetrics>>& per_n) {
    SweepSummary summary;
    summary.metric = protocol == ProtocolId::log_time ? "convergence_parallel_time"
                                                      : "silence_parallel_time";
    std::vector<std::pair<double, double>> points;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        double sum = 0.0;
        int used = 0;
        for (const RunMetrics& m : per_n[i]) {
            const auto v = detail::completion_interaction(protocol, m);
            if (v) {
                sum += static_cast<double>(*v) / static_cast<double>(ns[i]);
                ++used;
            }
        }
        if (used == 0)
            throw DomainError("no completed trials at n = " + std::to_string(ns[i]));
        summary.per_n_means.emplace_back(ns[i], sum / used);
        summary.trials_used.push_back(used);
        points.emplace_back(static_cast<double>(ns[i]), sum / used);
    }
    summary.fit = fit_loglog(points);
    return summary;
}

// Verification entry point shared by the CLI and the acceptance suite.
inline nlohmann::json verify_to_json(ProtocolId protocol, int n,
                                     const ParamOverrides& overrides,
                                     GraphOptions opts = {}) {
    Params p = overrides.build(protocol, n);
    return dispatch_protocol(protocol, [&](auto tag) -> nlohmann::json {
        using P = decltype(tag);
        if constexpr (!P::kSilent) {
            throw UnsupportedProtocolError(
                "log_time has an unbounded state set; exact verification is not defined");
        } else {
            const ConfigGraph<P> graph = build_config_graph<P>(p, opts);
            const VerificationReport report = verify_self_stabilizing(graph);
            nlohmann::json j{
                {"protocol", std::string(protocol_name(protocol))},
                {"n", n},
                {"ok", report.ok},
                {"node_count", report.node_count},
                {"scc_count", report.scc_count},
                {"silent_configs", report.silent_node_count},
                {"canonical", opts.canonical},
                {"params",
                 {{"name_space", p.name_space},
                  {"r_max", p.r_max},
                  {"d_max", p.d_max},
                  {"c_max", p.c_max},
                  {"scaled", overrides.name_space.has_value() ||
                                 p.name_space != Params::make(n).name_space}}},
            };
            if (report.counterexample_node) {
                j["counterexample"] = report.counterexample;
            } else {
                j["counterexample"] = nullptr;
            }
            return j;
        }
    });
}

inline int execute(const ExperimentSpec& spec) {
    spec.validate();

    switch (spec.command) {
        case Command::run:
        case Command::sweep: {
            std::vector<Row> rows;
            std::vector<std::vector<RunMetrics>> per_n;
            for (int n : spec.ns) {
                per_n.push_back(run_trials(spec.protocol, spec.init, n, spec.trials,
                                           spec.overrides, spec.seed, spec.jobs));
                const auto& metrics = per_n.back();
                for (std::size_t t = 0; t < metrics.size(); ++t)
                    rows.push_back(detail::metrics_row(spec, n, t, metrics[t]));
            }
            write_rows(rows, spec.format, spec.out_path, detail::metrics_header());
            if (spec.command == Command::sweep) {
                const SweepSummary summary = summarize_sweep(spec.protocol, spec.ns, per_n);
                const std::string fit_text = summary.to_json().dump(2) + "\n";
                write_text(fit_text,
                           spec.out_path.empty() ? "" : spec.out_path + ".fit.json");
            }
            return 0;
        }
        case Command::baseline: {
            std::vector<Row> rows;
            const bool epidemic = spec.baseline_kind != "rollcall";
            const bool rollcall = spec.baseline_kind != "epidemic";
            for (int n : spec.ns) {
                for (int t = 0; t < spec.trials; ++t) {
                    if (epidemic) {
                        RngStream rng = RngStream::derive(spec.seed,
                                                          static_cast<std::uint64_t>(n),
                                                          static_cast<std::uint64_t>(t) * 2);
                        const std::uint64_t v = epidemic_trial(n, rng);
                        rows.push_back(Row{{"kind", std::string("epidemic")},
                                           {"n", static_cast<std::int64_t>(n)},
                                           {"seed", spec.seed},
                                           {"trial", static_cast<std::uint64_t>(t)},
                                           {"interactions", v},
                                           {"parallel_time", static_cast<double>(v) / n}});
                    }
                    if (rollcall) {
                        RngStream rng =
                            RngStream::derive(spec.seed, static_cast<std::uint64_t>(n),
                                              static_cast<std::uint64_t>(t) * 2 + 1);
                        const std::uint64_t v = roll_call_trial(n, rng);
                        rows.push_back(Row{{"kind", std::string("roll_call")},
                                           {"n", static_cast<std::int64_t>(n)},
                                           {"seed", spec.seed},
                                           {"trial", static_cast<std::uint64_t>(t)},
                                           {"interactions", v},
                                           {"parallel_time", static_cast<double>(v) / n}});
                    }
                }
            }
            write_rows(rows, spec.format, spec.out_path,
                       {"kind", "n", "seed", "trial", "interactions", "parallel_time"});
            return 0;
        }
        case Command::verify: {
            const nlohmann::json report =
                verify_to_json(spec.protocol, spec.ns.front(), spec.overrides);
            write_text(report.dump(2) + "\n", spec.out_path);
            return 0;
        }
    }
    throw InvalidArgumentError("unknown command");
}

} // namespace popsim
