// icinet: command-line front end for the chiplet interconnect toolkit.
//
// Subcommands: generate, analyze, route, simulate, sweep, trace, gen-trace.
// Exit codes: 0 success, 1 validation failure, 2 usage error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ici/errors.hpp"
#include "ici/harness.hpp"
#include "ici/serialize.hpp"
#include "ici/simcore.hpp"
#include "ici/trace.hpp"

using namespace ici;

namespace {

struct CommonArgs {
    std::string family;
    int n = 16;
    std::string arrangement = "auto";
    std::string kind_scheme = "homogeneous";
    std::string phy_policy = "edge";
    std::string substrate = "organic";
    std::string format = "pretty";
    std::uint64_t seed = 1;
    std::string out;
};

void add_point_options(CLI::App* cmd, CommonArgs& a, bool need_family = true) {
    auto* fam = cmd->add_option("--family", a.family, "topology family name");
    if (need_family) fam->required();
    cmd->add_option("--n", a.n, "chiplet count")->check(CLI::PositiveNumber);
    cmd->add_option("--arrangement", a.arrangement,
                    "auto | grid | hex_block | hex_spiral");
    cmd->add_option("--kind-scheme", a.kind_scheme,
                    "homogeneous | mem_columns | trace_cmi");
    cmd->add_option("--phy-policy", a.phy_policy, "edge | center");
}

void add_format_option(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--format", a.format, "csv | pretty")
        ->check(CLI::IsMember({"csv", "pretty"}));
}

PointBundle make_point(const CommonArgs& a) {
    return build_point(topology_kind_from_string(a.family), a.n, a.arrangement,
                       kind_scheme_from_string(a.kind_scheme),
                       phy_policy_from_string(a.phy_policy));
}

int cmd_generate(const CommonArgs& a) {
    PointBundle b = make_point(a);
    std::string dir = a.out.empty() ? std::string(".") : a.out;
    std::filesystem::create_directories(dir);
    const std::string pfile = dir + "/placement.json";
    const std::string tfile = dir + "/topology.json";
    const std::string mfile = dir + "/metrics.json";
    write_text_file(pfile, placement_to_json(b.topology.placement));
    write_text_file(tfile, topology_to_json(b.topology));
    write_text_file(mfile, metrics_to_json(b.metrics));
    std::printf("%s\n%s\n%s\n", pfile.c_str(), tfile.c_str(), mfile.c_str());
    return 0;
}

int cmd_analyze(const CommonArgs& a) {
    PointBundle b = make_point(a);
    const GraphMetrics& m = b.metrics;
    ValidationReport rep = check_table1(topology_kind_from_string(a.family), m, a.n);
    if (a.format == "csv") {
        std::printf("family,N,diameter,avg_hops,radix,max_range,L_hat_mm,reference_pass\n");
        std::printf("%s,%d,%d,%.6g,%d,%d,%.6g,%s\n", a.family.c_str(), a.n, m.diameter,
                    m.avg_hops, m.radix, m.max_range, m.max_length_mm,
                    rep.pass ? "true" : "false");
    } else {
        std::printf("family: %s\n", a.family.c_str());
        std::printf("chiplets: %d\n", a.n);
        std::printf("diameter: %d\n", m.diameter);
        std::printf("radix: %d\n", m.radix);
        std::printf("max range: %d\n", m.max_range);
        std::printf("avg hops: %.4f\n", m.avg_hops);
        std::printf("max link length: %.4f mm\n", m.max_length_mm);
        if (rep.columns.empty()) {
            std::printf("reference check: n/a (%s)\n", rep.note.c_str());
        } else {
            std::printf("reference check: %s\n", rep.pass ? "pass" : "FAIL");
            for (const ColumnCheck& c : rep.columns)
                std::printf("  %-10s measured %g expected %g (+-%g) %s\n",
                            c.column.c_str(), c.measured, c.expected, c.tolerance,
                            c.pass ? "ok" : "FAIL");
        }
    }
    // Only an applicable, failing reference row is a validation failure.
    return (!rep.columns.empty() && !rep.pass) ? 1 : 0;
}

int cmd_route(const CommonArgs& a) {
    PointBundle b = make_point(a);
    DeadlockReport rep = verify_deadlock_free(b.topology, b.routing.cdg,
                                              b.routing.turns, b.routing.table);
    double stretch = routing_stretch(b.topology, b.routing.table);
    std::printf("CDG acyclic: %s; pairs routed: %d/%d\n", rep.acyclic ? "yes" : "no",
                rep.pairs_routed, rep.pairs_total);
    std::printf("turns legal: %s; forbidden turns: %zu; routing stretch: %.4f\n",
                rep.turns_legal ? "yes" : "no", b.routing.turns.forbidden.size(),
                stretch);
    if (!rep.pass) {
        std::printf("detail: %s\n", rep.detail.c_str());
        return 1;
    }
    if (!a.out.empty()) {
        std::filesystem::create_directories(a.out);
        const std::string rfile = a.out + "/routes.json";
        write_text_file(rfile, routes_to_json(b.routing.table));
        std::printf("routes: %s\n", rfile.c_str());
    }
    return 0;
}

void print_stats(const SimStats& st, const std::string& format) {
    if (format == "csv") {
        std::printf("offered_rate,accepted_rate,avg_latency_ns,p99_latency_ns,"
                    "delivered_packets,avg_hops,deadlock\n");
        std::printf("%.9g,%.9g,%.9g,%.9g,%lld,%.9g,%s\n", st.offered_rate,
                    st.accepted_rate, st.avg_latency_ns, st.p99_latency_ns,
                    st.delivered_packets, st.avg_hops,
                    st.deadlock_flag ? "true" : "false");
        return;
    }
    std::printf("offered rate: %.6g flits/core/cycle\n", st.offered_rate);
    std::printf("accepted rate: %.6g flits/core/cycle\n", st.accepted_rate);
    std::printf("avg latency: %.4f ns\n", st.avg_latency_ns);
    std::printf("p99 latency: %.4f ns\n", st.p99_latency_ns);
    std::printf("delivered packets: %lld\n", st.delivered_packets);
    std::printf("avg hops: %.4f\n", st.avg_hops);
    std::printf("deadlock: %s\n", st.deadlock_flag ? "YES" : "no");
}

int cmd_simulate(const CommonArgs& a, const std::string& pattern, double rate,
                 bool saturation, const SimParams& sp_in) {
    PointBundle b = make_point(a);
    TechParams tech = tech_from_substrate(a.substrate);
    RateTable rates = default_rate_table(a.substrate);
    SimParams sp = sp_in;
    sp.seed = a.seed;
    TrafficSpec spec;
    spec.pattern = traffic_pattern_from_string(pattern);
    if (saturation) {
        SaturationResult sat =
            find_saturation(b.topology, b.routing.table, tech, rates, spec, sp);
        std::printf("saturation rate: %.9g flits/core/cycle\n", sat.rate);
        std::printf("absolute throughput: %.9g bits/s per chiplet\n",
                    absolute_throughput_bits_per_s(tech, rates, sat.rate,
                                                   b.metrics.radix,
                                                   b.metrics.max_length_mm));
        if (!sat.note.empty()) std::printf("note: %s\n", sat.note.c_str());
        return 0;
    }
    SimStats st = simulate(b.topology, b.routing.table, tech, rates, spec, sp, rate);
    print_stats(st, a.format);
    return 0;
}

int cmd_sweep(const std::string& config_path, const CommonArgs& a, bool seed_set,
              bool out_set, int jobs, bool jobs_set) {
    std::string text;
    try {
        text = read_text_file(config_path);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    ExperimentConfig cfg;
    try {
        cfg = experiment_config_from_json(text);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    if (seed_set) cfg.seed = a.seed;
    if (out_set) cfg.output_dir = a.out;
    if (jobs_set) cfg.jobs = jobs;
    SweepResult res = run_sweep(cfg);
    if (a.format == "csv") {
        std::fputs(res.results_csv.c_str(), stdout);
    } else {
        int skipped = 0;
        for (const ResultRow& r : res.rows)
            if (r.t_r == 0.0 && !r.skipped_reason.empty()) ++skipped;
        std::printf("sweep points: %zu (%d without results)\n", res.rows.size(),
                    skipped);
        if (!res.output_dir.empty())
            std::printf("wrote results.csv, validation.csv, shapes.csv to %s\n",
                        res.output_dir.c_str());
    }
    return 0;
}

int cmd_trace(const CommonArgs& a, const std::string& trace_path, long long cycle_cap,
              const SimParams& sp_in) {
    if (!std::filesystem::exists(trace_path)) {
        std::fprintf(stderr, "error: trace file '%s' not found\n", trace_path.c_str());
        return 2;
    }
    PointBundle b = make_point(a);
    Trace tr = load_trace(trace_path);
    TechParams tech = tech_from_substrate(a.substrate);
    RateTable rates = default_rate_table(a.substrate);
    SimParams sp = sp_in;
    sp.seed = a.seed;
    SimStats st =
        replay_trace(b.topology, b.routing.table, tech, rates, tr, sp, cycle_cap);
    if (a.format == "pretty")
        std::printf("trace records: %zu\n", tr.records.size());
    print_stats(st, a.format);
    return 0;
}

int cmd_gen_trace(const CommonArgs& a, int rows, int cols, long long cycles,
                  double requests_per_site_cycle, long long data_bytes) {
    Placement p = build_placement(Arrangement::grid, {rows, cols, 0}, 74.0, 0.15);
    assign_kinds(p, KindScheme::trace_cmi);
    Trace tr = generate_trace(p, a.seed, cycles, requests_per_site_cycle, data_bytes);
    const std::string path = a.out.empty() ? std::string("trace.txt") : a.out;
    save_trace(tr, path);
    std::printf("%s: %zu records over %lld cycles on a %dx%d board\n", path.c_str(),
                tr.records.size(), cycles, rows, cols);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"chiplet interconnect topology and simulation toolkit"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    CommonArgs a;
    std::string pattern = "uniform";
    std::string config_path;
    std::string trace_path;
    double rate = 0.1;
    bool saturation = false;
    int jobs = 1;
    long long cycle_cap = 100000;
    int gt_rows = 4, gt_cols = 4;
    long long gt_cycles = 2000;
    double gt_req = 0.02;
    long long gt_bytes = 64;
    SimParams sp;

    auto add_sim_options = [&](CLI::App* cmd) {
        cmd->add_option("--substrate", a.substrate, "organic | glass");
        cmd->add_option("--seed", a.seed, "simulation seed");
        cmd->add_option("--flits", sp.packet_flits, "flits per synthetic packet");
        cmd->add_option("--warmup", sp.warmup_cycles, "warmup cycles");
        cmd->add_option("--measure", sp.measure_cycles, "measurement cycles");
        cmd->add_option("--vcs", sp.vcs, "virtual channels per port");
    };

    CLI::App* generate = app.add_subcommand(
        "generate", "write placement/topology/metrics documents for one point");
    add_point_options(generate, a);
    generate->add_option("--out", a.out, "output directory (default .)");

    CLI::App* analyze =
        app.add_subcommand("analyze", "graph metrics and reference-table check");
    add_point_options(analyze, a);
    add_format_option(analyze, a);

    CLI::App* route = app.add_subcommand(
        "route", "build routing tables and verify deadlock freedom");
    add_point_options(route, a);
    route->add_option("--out", a.out, "directory for the routes document");

    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "run one synthetic-traffic simulation");
    add_point_options(simulate_cmd, a);
    simulate_cmd->add_option("--pattern", pattern,
                             "uniform | permutation | tornado | neighbor | hetero_mix");
    simulate_cmd->add_option("--rate", rate, "injection rate, flits/core/cycle");
    simulate_cmd->add_flag("--saturation", saturation,
                           "search the saturation rate instead of one run");
    add_sim_options(simulate_cmd);
    add_format_option(simulate_cmd, a);

    CLI::App* sweep = app.add_subcommand("sweep", "run the full experiment grid");
    sweep->add_option("--config", config_path, "experiment config JSON")->required();
    CLI::Option* sweep_seed = sweep->add_option("--seed", a.seed, "override config seed");
    CLI::Option* sweep_out =
        sweep->add_option("--out", a.out, "override config output dir");
    CLI::Option* sweep_jobs = sweep->add_option("--jobs", jobs, "worker threads");
    add_format_option(sweep, a);

    CLI::App* trace_cmd = app.add_subcommand("trace", "replay a trace file");
    add_point_options(trace_cmd, a);
    trace_cmd->add_option("--trace", trace_path, "trace file path")->required();
    trace_cmd->add_option("--cycle-cap", cycle_cap, "stop injecting at this cycle");
    add_sim_options(trace_cmd);
    add_format_option(trace_cmd, a);

    CLI::App* gen_trace = app.add_subcommand(
        "gen-trace", "produce a synthetic request/reply trace");
    gen_trace->add_option("--rows", gt_rows, "board rows");
    gen_trace->add_option("--cols", gt_cols, "board cols");
    gen_trace->add_option("--cycles", gt_cycles, "trace length in cycles");
    gen_trace->add_option("--requests", gt_req, "requests per compute site per cycle");
    gen_trace->add_option("--bytes", gt_bytes, "payload bytes per data packet");
    gen_trace->add_option("--seed", a.seed, "generation seed");
    gen_trace->add_option("--out", a.out, "output file (default trace.txt)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*generate) return cmd_generate(a);
        if (*analyze) return cmd_analyze(a);
        if (*route) return cmd_route(a);
        if (*simulate_cmd) return cmd_simulate(a, pattern, rate, saturation, sp);
        if (*sweep)
            return cmd_sweep(config_path, a, static_cast<bool>(*sweep_seed),
                             static_cast<bool>(*sweep_out), jobs,
                             static_cast<bool>(*sweep_jobs));
        if (*trace_cmd) return cmd_trace(a, trace_path, cycle_cap, sp);
        if (*gen_trace) return cmd_gen_trace(a, gt_rows, gt_cols, gt_cycles, gt_req,
                                             gt_bytes);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
