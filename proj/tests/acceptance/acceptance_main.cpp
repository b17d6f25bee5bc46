// Acceptance checks for the interconnect toolkit. Each criterion prints one
// PASS/FAIL line; `--criterion N` runs a single one. Exit 0 only when every
// selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ici/errors.hpp"
#include "ici/harness.hpp"

using namespace ici;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    }
};

const std::vector<int> kSquareCounts{16, 36, 64, 100, 144, 196, 256};
const std::vector<int> kHexCounts{19, 37, 61, 91, 127, 169, 217};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return std::string(buf);
}

GraphMetrics metrics_at(TopologyKind kind, int n) {
    ShapeChoice sc = resolve_shape(kind, n, "auto");
    if (!sc.skip.empty()) throw ValidationError(sc.skip);
    Placement p = build_placement(sc.arrangement, sc.dims, 74.0, 0.15);
    Topology t = generate_topology(kind, std::move(p));
    return graph_metrics(t);
}

PointBundle point_at(TopologyKind kind, int n) {
    return build_point(kind, n, "auto", KindScheme::homogeneous, PhyPolicy::edge);
}

// ---- 1. closed-form diameters of the square-grid families -----------------

Outcome criterion1() {
    Outcome out;
    struct Row {
        TopologyKind kind;
        std::function<int(int)> formula;
    };
    const std::vector<Row> rows{
        {TopologyKind::mesh, [](int n) { return 2 * int(std::lround(std::sqrt(n))) - 2; }},
        {TopologyKind::torus, [](int n) { return 2 * (int(std::lround(std::sqrt(n))) / 2); }},
        {TopologyKind::folded_torus,
         [](int n) { return 2 * (int(std::lround(std::sqrt(n))) / 2); }},
        {TopologyKind::hypercube, [](int n) { return int(std::lround(std::log2(n))); }},
        {TopologyKind::flattened_butterfly, [](int) { return 2; }},
    };
    for (const Row& r : rows)
        for (int n : {16, 64, 256}) {
            int expect = r.formula(n);
            int got = metrics_at(r.kind, n).diameter;
            if (got != expect)
                out.fail(fmt("%s N=%d diameter %d != %d", to_string(r.kind), n, got,
                             expect));
        }
    return out;
}

// ---- 2. hex-family diameters and the folded-hex bounds ---------------------

Outcome criterion2() {
    Outcome out;
    for (int n : {37, 61, 91, 127}) {
        double root = std::sqrt(12.0 * n - 3.0);
        double hex_expect = root / 3.0 - 1.0;
        double fht_expect = root / 6.0 + 0.5;
        int hex_got = metrics_at(TopologyKind::hexa_mesh, n).diameter;
        int fht_got = metrics_at(TopologyKind::folded_hexa_torus, n).diameter;
        if (std::abs(hex_got - hex_expect) > 1.0)
            out.fail(fmt("hexa_mesh N=%d diameter %d vs %.2f +-1", n, hex_got,
                         hex_expect));
        if (std::abs(fht_got - fht_expect) > 1.0)
            out.fail(fmt("folded_hexa_torus N=%d diameter %d vs %.2f +-1", n, fht_got,
                         fht_expect));
    }
    std::vector<int> all_counts = kSquareCounts;
    all_counts.insert(all_counts.end(), kHexCounts.begin(), kHexCounts.end());
    for (int n : all_counts) {
        int hex_d = metrics_at(TopologyKind::hexa_mesh, n).diameter;
        int fht_d = metrics_at(TopologyKind::folded_hexa_torus, n).diameter;
        if (!(fht_d < std::sqrt(double(n))))
            out.fail(fmt("folded_hexa_torus N=%d diameter %d !< sqrt(N)=%.2f", n,
                         fht_d, std::sqrt(double(n))));
        if (!(fht_d <= hex_d / 2 + 1))
            out.fail(fmt("folded_hexa_torus N=%d diameter %d > %d (half hexa_mesh +1)",
                         n, fht_d, hex_d / 2 + 1));
    }
    return out;
}

// ---- 3. router area overhead and transceiver share ratios ------------------

bool rounds_to(double value, double expect) {
    return std::abs(std::round(value * 100.0) / 100.0 - expect) < 1e-9;
}

Outcome criterion3() {
    Outcome out;
    TechParams t = tech_from_substrate("organic");
    const double areas[3] = {37.0, 74.0, 148.0};
    const double expect6[3] = {4.34, 2.27, 1.16};
    const double expect8[3] = {8.69, 4.54, 2.32};
    for (int i = 0; i < 3; ++i) {
        t.chiplet_area_mm2 = areas[i];
        double base = chiplet_area_mm2(t, 4);
        double r4 = (chiplet_area_mm2(t, 4) - base) / base * 100.0;
        double r6 = (chiplet_area_mm2(t, 6) - base) / base * 100.0;
        double r8 = (chiplet_area_mm2(t, 8) - base) / base * 100.0;
        if (!rounds_to(r4, 0.0))
            out.fail(fmt("A_c=%g radix-4 overhead %.4f%% != 0.00%%", areas[i], r4));
        if (!rounds_to(r6, expect6[i]))
            out.fail(fmt("A_c=%g radix-6 overhead %.4f%% != %.2f%%", areas[i], r6,
                         expect6[i]));
        if (!rounds_to(r8, expect8[i]))
            out.fail(fmt("A_c=%g radix-8 overhead %.4f%% != %.2f%%", areas[i], r8,
                         expect8[i]));
    }
    t.chiplet_area_mm2 = 74.0;
    double share4 = 4 * t.phy_area_mm2 / chiplet_area_mm2(t, 4) * 100.0;
    double share6 = 6 * t.phy_area_mm2 / chiplet_area_mm2(t, 6) * 100.0;
    if (!rounds_to(share4, 4.54))
        out.fail(fmt("radix-4 transceiver share %.4f%% != 4.54%%", share4));
    if (!rounds_to(share6, 6.66))
        out.fail(fmt("radix-6 transceiver share %.4f%% != 6.66%%", share6));
    return out;
}

// ---- 4. link-range limits per family ---------------------------------------

Outcome criterion4() {
    Outcome out;
    auto counts_for = [](TopologyKind kind) {
        std::vector<int> counts = kSquareCounts;
        if (kind == TopologyKind::hexa_mesh || kind == TopologyKind::folded_hexa_torus)
            counts.insert(counts.end(), kHexCounts.begin(), kHexCounts.end());
        return counts;
    };
    for (TopologyKind kind : {TopologyKind::folded_torus,
                              TopologyKind::folded_hexa_torus,
                              TopologyKind::folded_octa_torus})
        for (int n : counts_for(kind)) {
            int r = metrics_at(kind, n).max_range;
            if (r > 1)
                out.fail(fmt("%s N=%d max range %d > 1", to_string(kind), n, r));
        }
    for (TopologyKind kind : {TopologyKind::hexa_mesh, TopologyKind::mesh,
                              TopologyKind::octa_mesh, TopologyKind::honeycomb_mesh})
        for (int n : counts_for(kind)) {
            int r = metrics_at(kind, n).max_range;
            if (r != 0)
                out.fail(fmt("%s N=%d max range %d != 0", to_string(kind), n, r));
        }
    return out;
}

// ---- 5. deadlock freedom across the whole grid -----------------------------

Outcome criterion5() {
    Outcome out;
    auto start = std::chrono::steady_clock::now();
    int points = 0;
    for (const auto& entry : topology_registry()) {
        TopologyKind kind = topology_kind_from_string(entry.first);
        std::vector<int> counts = kSquareCounts;
        if (kind == TopologyKind::hexa_mesh || kind == TopologyKind::folded_hexa_torus)
            counts.insert(counts.end(), kHexCounts.begin(), kHexCounts.end());
        for (int n : counts) {
            if (!resolve_shape(kind, n, "auto").skip.empty()) continue;
            PointBundle b;
            try {
                b = point_at(kind, n);
            } catch (const ValidationError&) {
                continue; // family does not support this count (e.g. hypercube at 36)
            }
            DeadlockReport rep = verify_deadlock_free(b.topology, b.routing.cdg,
                                                      b.routing.turns, b.routing.table);
            ++points;
            if (!rep.pass)
                out.fail(fmt("%s N=%d: %s", entry.first.c_str(), n,
                             rep.detail.c_str()));
        }
    }

    // Long high-load run on the densest-folded family: must drain cleanly.
    PointBundle b = point_at(TopologyKind::folded_hexa_torus, 64);
    TechParams tech = tech_from_substrate("organic");
    RateTable rates = default_rate_table("organic");
    TrafficSpec spec;
    SimParams sp;
    SaturationResult sat =
        find_saturation(b.topology, b.routing.table, tech, rates, spec, sp);
    if (sat.rate <= 0.0) {
        out.fail("folded_hexa_torus N=64 has zero saturation rate");
    } else {
        sp.warmup_cycles = 5000;
        sp.measure_cycles = 995000;
        SimStats st = simulate(b.topology, b.routing.table, tech, rates, spec, sp,
                               0.9 * sat.rate);
        if (st.deadlock_flag)
            out.fail("high-load run did not drain (deadlock flag set)");
        if (st.delivered_packets <= 0) out.fail("high-load run delivered nothing");
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                start)
                      .count();
    if (out.pass)
        out.detail = fmt("%d grid points + one 1e6-cycle run in %.1f s", points, secs);
    return out;
}

// ---- 6. zero throughput past the usable link length ------------------------

Outcome criterion6() {
    Outcome out;
    for (TopologyKind kind : {TopologyKind::torus, TopologyKind::flattened_butterfly}) {
        PointBundle b = point_at(kind, 256);
        if (!(b.metrics.max_length_mm > 70.0))
            out.fail(fmt("%s N=256 longest link %.2f mm !> 70 mm", to_string(kind),
                         b.metrics.max_length_mm));
        TechParams tech = tech_from_substrate("organic");
        RateTable rates = default_rate_table("organic");
        TrafficSpec spec;
        SimParams sp;
        SaturationResult sat =
            find_saturation(b.topology, b.routing.table, tech, rates, spec, sp);
        if (sat.rate != 0.0)
            out.fail(fmt("%s N=256 saturation %.4f != 0", to_string(kind), sat.rate));
    }
    return out;
}

// ---- 7/8. throughput and latency orderings at N = 64 -----------------------

struct LoadPoint {
    double t_a = 0.0;
    double latency_ns = 0.0;
};

LoadPoint averaged_load_point(TopologyKind kind, bool with_latency,
                              double load_frac) {
    PointBundle b = point_at(kind, 64);
    TechParams tech = tech_from_substrate("organic");
    RateTable rates = default_rate_table("organic");
    TrafficSpec spec;
    LoadPoint lp;
    const int seeds[3] = {1, 2, 3};
    for (int seed : seeds) {
        SimParams sp;
        sp.seed = static_cast<uint64_t>(seed);
        SaturationResult sat =
            find_saturation(b.topology, b.routing.table, tech, rates, spec, sp);
        lp.t_a += absolute_throughput_bits_per_s(tech, rates, sat.rate,
                                                 b.metrics.radix,
                                                 b.metrics.max_length_mm) /
                  3.0;
        if (with_latency && sat.rate > 0.0) {
            SimStats st = simulate(b.topology, b.routing.table, tech, rates, spec,
                                   sp, load_frac * sat.rate);
            lp.latency_ns += st.avg_latency_ns / 3.0;
        }
    }
    return lp;
}

Outcome criterion7() {
    Outcome out;
    double fht = averaged_load_point(TopologyKind::folded_hexa_torus, false, 0).t_a;
    double hexa = averaged_load_point(TopologyKind::hexa_mesh, false, 0).t_a;
    double mesh = averaged_load_point(TopologyKind::mesh, false, 0).t_a;
    double ftor = averaged_load_point(TopologyKind::folded_torus, false, 0).t_a;
    if (!(fht > hexa))
        out.fail(fmt("T_a folded_hexa_torus %.3e !> hexa_mesh %.3e", fht, hexa));
    if (!(hexa > mesh)) out.fail(fmt("T_a hexa_mesh %.3e !> mesh %.3e", hexa, mesh));
    if (!(ftor > mesh))
        out.fail(fmt("T_a folded_torus %.3e !> mesh %.3e", ftor, mesh));
    if (out.pass)
        out.detail = fmt("T_a bits/s: fht %.3e > hexa %.3e > mesh %.3e; ftorus %.3e",
                         fht, hexa, mesh, ftor);
    return out;
}

Outcome criterion8() {
    Outcome out;
    double fht =
        averaged_load_point(TopologyKind::folded_hexa_torus, true, 0.3).latency_ns;
    double hexa = averaged_load_point(TopologyKind::hexa_mesh, true, 0.3).latency_ns;
    double mesh = averaged_load_point(TopologyKind::mesh, true, 0.3).latency_ns;
    if (!(fht < hexa))
        out.fail(fmt("latency folded_hexa_torus %.2f !< hexa_mesh %.2f", fht, hexa));
    if (!(hexa < mesh))
        out.fail(fmt("latency hexa_mesh %.2f !< mesh %.2f", hexa, mesh));
    if (out.pass)
        out.detail = fmt("avg ns: fht %.2f < hexa %.2f < mesh %.2f", fht, hexa, mesh);
    return out;
}

// ---- 9. rate-table bounds over the computed length bands -------------------

Outcome criterion9() {
    Outcome out;
    const double side = std::sqrt(74.0);
    for (const std::string& sub : {std::string("organic"), std::string("glass")}) {
        TechParams t = tech_from_substrate(sub);
        RateTable rt = default_rate_table(sub);
        double pitch = side + t.spacing_mm;
        double band1_lo = side + 2.0 * t.spacing_mm;    // straight, one skip
        double band1_hi = 2.0 * std::sqrt(2.0) * pitch - side; // diagonal, one skip
        double band2_hi = 3.0 * std::sqrt(2.0) * pitch - side; // diagonal, two skips
        for (int i = 0; i <= 256; ++i) {
            double len = band1_lo + (band1_hi - band1_lo) * i / 256.0;
            double f = rate_fraction(rt, len);
            if (sub == "glass" && f < 0.99)
                out.fail(fmt("glass fraction %.4f < 0.99 at %.2f mm", f, len));
            if (sub == "organic" && (f < 0.89 || f > 0.97))
                out.fail(fmt("organic fraction %.4f outside [0.89,0.97] at %.2f mm",
                             f, len));
            if (!out.pass) break;
        }
        double f2 = rate_fraction(rt, band2_hi);
        double floor2 = sub == "glass" ? 0.66 : 0.47;
        if (f2 < floor2)
            out.fail(fmt("%s fraction %.4f < %.2f at two-skip maximum %.2f mm",
                         sub.c_str(), f2, floor2, band2_hi));
    }
    return out;
}

// ---- 10. zero-load latency against the analytic model ----------------------

double link_length_between(const Topology& t, int a, int b) {
    if (a > b) std::swap(a, b);
    for (const Link& l : t.links)
        if (l.a == a && l.b == b) return l.length_mm;
    throw IntegrityError(fmt("no link %d-%d", a, b));
}

Outcome check_zero_load(TopologyKind kind, int n, Outcome out) {
    PointBundle b = point_at(kind, n);
    TechParams tech = tech_from_substrate("organic");
    RateTable rates = default_rate_table("organic");
    SimParams sp;
    std::mt19937_64 rng(20260814);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int i = 0; i < 100; ++i) {
        int src = pick(rng), dst = pick(rng);
        if (src == dst) {
            --i;
            continue;
        }
        std::vector<int> path = b.routing.table.route(src, dst);
        int hops = int(path.size()) - 1;
        double wire_cycles = 0.0;
        for (int k = 0; k + 1 < int(path.size()); ++k)
            wire_cycles += link_latency_cycles(
                tech, link_length_between(b.topology, path[k], path[k + 1]));
        double analytic = sp.router_latency_cycles +
                          hops * (sp.router_latency_cycles +
                                  2.0 * sp.phy_latency_cycles) +
                          wire_cycles + (sp.packet_flits - 1);
        double measured = single_packet_latency_ns(b.topology, b.routing.table, tech,
                                                   rates, sp, src, dst,
                                                   sp.packet_flits) /
                          tech.cycle_time_ns;
        if (std::abs(measured - analytic) > double(hops)) {
            out.fail(fmt("%s %d->%d: measured %.1f vs analytic %.1f cycles (%d hops)",
                         to_string(kind), src, dst, measured, analytic, hops));
            break;
        }
    }
    return out;
}

Outcome criterion10() {
    Outcome out;
    out = check_zero_load(TopologyKind::mesh, 16, out);
    out = check_zero_load(TopologyKind::folded_hexa_torus, 37, out);
    return out;
}

// ---- 11. sweep determinism --------------------------------------------------

Outcome criterion11() {
    Outcome out;
    ExperimentConfig cfg;
    cfg.families = {"mesh", "folded_hexa_torus"};
    cfg.chiplet_counts = {16};
    cfg.sim.warmup_cycles = 300;
    cfg.sim.measure_cycles = 1500;
    cfg.sim.drain_cycle_cap = 30000;
    cfg.sim.sat_resolution = 64;
    cfg.output_dir.clear();
    cfg.seed = 5;
    SweepResult a = run_sweep(cfg);
    SweepResult b = run_sweep(cfg);
    if (a.results_csv != b.results_csv) out.fail("results differ between reruns");
    if (a.validation_csv != b.validation_csv)
        out.fail("validation output differs between reruns");
    if (a.shapes_csv != b.shapes_csv) out.fail("shape records differ between reruns");
    if (out.pass)
        out.detail = fmt("%zu rows byte-identical across reruns", a.rows.size());
    return out;
}

struct Criterion {
    int id;
    const char* label;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {1, "closed-form diameters, square-grid families", criterion1},
        {2, "hex-family diameters and folded-hex bounds", criterion2},
        {3, "router area overhead and transceiver shares", criterion3},
        {4, "link-range limits per family", criterion4},
        {5, "deadlock freedom across the full grid", criterion5},
        {6, "zero throughput past the usable link length", criterion6},
        {7, "throughput ordering under uniform traffic", criterion7},
        {8, "light-load latency ordering", criterion8},
        {9, "rate-table bounds over the length bands", criterion9},
        {10, "zero-load latency matches the analytic model", criterion10},
        {11, "sweep determinism", criterion11},
    };
    return all;
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
            return 2;
        }
    }
    if (only != 0 && (only < 1 || only > int(criteria().size()))) {
        std::fprintf(stderr, "criterion %d out of range 1..%zu\n", only,
                     criteria().size());
        return 2;
    }
    bool all_pass = true;
    for (const Criterion& c : criteria()) {
        if (only != 0 && c.id != only) continue;
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.fail(fmt("exception: %s", e.what()));
        }
        all_pass = all_pass && out.pass;
        std::printf("criterion %2d [%s]: %s%s%s\n", c.id, c.label,
                    out.pass ? "PASS" : "FAIL", out.detail.empty() ? "" : " — ",
                    out.detail.c_str());
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
