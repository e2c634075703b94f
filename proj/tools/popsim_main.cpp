// popsim - population protocol experiment harness.
//
// Subcommands: run (per-trial rows), sweep (rows plus a scaling fit),
// baseline (epidemic / roll-call processes), verify (exact small-instance
// verification report). Reruns with identical arguments and seed produce
// byte-identical output.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "popsim/experiment.hpp"

namespace {

std::vector<int> parse_n_list(const std::string& text) {
    std::vector<int> ns;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        ns.push_back(std::stoi(part));
    }
    if (ns.empty()) throw popsim::InvalidArgumentError("empty n list");
    return ns;
}

struct CommonArgs {
    std::string protocol = "cai";
    std::string init = "uniform_random";
    std::string n_text = "8";
    int trials = 1;
    std::uint64_t seed = 0;
    std::int64_t max_interactions = -1;
    std::int64_t tail_margin = -1;
    std::int64_t name_space = -1;
    std::string format = "csv";
    std::string out_path;
    int jobs = 1;
    std::string baseline_kind = "both";
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool with_protocol) {
    if (with_protocol) {
        cmd->add_option("--protocol", args.protocol,
                        "protocol: cai, linear_time, linear_state, log_time, obs");
        cmd->add_option("--init", args.init, "initial configuration kind");
    }
    cmd->add_option("--n", args.n_text, "population size, or comma-separated list");
    cmd->add_option("--trials", args.trials, "independent trials per n");
    cmd->add_option("--seed", args.seed, "master seed (env POPSIM_SEED)")
        ->envname("POPSIM_SEED");
    cmd->add_option("--max-interactions", args.max_interactions, "run horizon");
    cmd->add_option("--tail-margin", args.tail_margin,
                    "hindsight-stability window in interactions");
    cmd->add_option("--name-space", args.name_space, "name universe size override");
    cmd->add_option("--format", args.format, "output format: csv or json");
    cmd->add_option("--out", args.out_path, "output path (default stdout)");
    cmd->add_option("--jobs", args.jobs, "worker threads over trials");
}

popsim::ExperimentSpec build_spec(popsim::Command command, const CommonArgs& args) {
    popsim::ExperimentSpec spec;
    spec.command = command;
    spec.protocol = popsim::protocol_from_name(args.protocol);
    spec.init = popsim::init_kind_from_name(args.init);
    spec.ns = parse_n_list(args.n_text);
    spec.trials = args.trials;
    spec.seed = args.seed;
    if (args.max_interactions >= 0)
        spec.overrides.max_interactions = static_cast<std::uint64_t>(args.max_interactions);
    if (args.tail_margin >= 0)
        spec.overrides.tail_margin = static_cast<std::uint64_t>(args.tail_margin);
    if (args.name_space >= 0)
        spec.overrides.name_space = static_cast<std::uint64_t>(args.name_space);
    spec.format = popsim::format_from_name(args.format);
    spec.out_path = args.out_path;
    spec.jobs = args.jobs;
    spec.baseline_kind = args.baseline_kind;
    return spec;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"population protocol simulator and verifier"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, baseline_args, verify_args;

    CLI::App* run_cmd = app.add_subcommand("run", "simulate trials at one population size");
    add_common_flags(run_cmd, run_args, true);

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "simulate across population sizes and fit a scaling law");
    add_common_flags(sweep_cmd, sweep_args, true);

    CLI::App* baseline_cmd =
        app.add_subcommand("baseline", "epidemic and roll-call reference processes");
    add_common_flags(baseline_cmd, baseline_args, false);
    baseline_cmd->add_option("--kind", baseline_args.baseline_kind,
                             "epidemic, rollcall or both");

    CLI::App* verify_cmd =
        app.add_subcommand("verify", "exact self-stabilization check at tiny scale");
    add_common_flags(verify_cmd, verify_args, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return popsim::execute(build_spec(popsim::Command::run, run_args));
        if (sweep_cmd->parsed())
            return popsim::execute(build_spec(popsim::Command::sweep, sweep_args));
        if (baseline_cmd->parsed())
            return popsim::execute(build_spec(popsim::Command::baseline, baseline_args));
        if (verify_cmd->parsed())
            return popsim::execute(build_spec(popsim::Command::verify, verify_args));
    } catch (const popsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
