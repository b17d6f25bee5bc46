#include "ici/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "ici/errors.hpp"
#include "ici/serialize.hpp"

namespace ici {

namespace {

using json = nlohmann::json;

void require_keys(const json& doc, const char* what,
                  std::initializer_list<const char*> allowed) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) known = known || it.key() == k;
        if (!known)
            throw ParseError(std::string("unknown ") + what + " key '" + it.key() + "'");
    }
}

void apply_tech_override(TechParams& t, const std::string& key, double v) {
    auto as_int = [&](int& field) {
        if (v <= 0 || v != std::floor(v))
            throw ParseError("tech field '" + key + "' needs a positive integer");
        field = static_cast<int>(v);
    };
    if (key == "spacing_mm") t.spacing_mm = v;
    else if (key == "chiplet_area_mm2") t.chiplet_area_mm2 = v;
    else if (key == "phy_area_mm2") t.phy_area_mm2 = v;
    else if (key == "chiplet_power_w") t.chiplet_power_w = v;
    else if (key == "energy_pj_per_bit") t.energy_pj_per_bit = v;
    else if (key == "phy_latency_ns") t.phy_latency_ns = v;
    else if (key == "router_latency_ns") t.router_latency_ns = v;
    else if (key == "bump_frac_power") t.bump_frac_power = v;
    else if (key == "bump_frac_io") t.bump_frac_io = v;
    else if (key == "cores_per_chiplet") as_int(t.cores_per_chiplet);
    else if (key == "bump_pitch_um") t.bump_pitch_um = v;
    else if (key == "non_data_wires") as_int(t.non_data_wires);
    else if (key == "rel_permittivity") t.rel_permittivity = v;
    else if (key == "light_speed_km_per_s") t.light_speed_km_per_s = v;
    else if (key == "rmax_gbit_s") t.rmax_gbit_s = v;
    else if (key == "cycle_time_ns") t.cycle_time_ns = v;
    else throw ParseError("unknown tech field '" + key + "'");
}

void apply_sim_overrides(SimParams& sp, const json& doc) {
    require_keys(doc, "sim",
                 {"vcs", "buf_flits_per_vc", "router_latency_cycles",
                  "phy_latency_cycles", "warmup_cycles", "measure_cycles",
                  "drain_cycle_cap", "packet_flits", "sat_accept_frac",
                  "sat_latency_mult", "sat_resolution"});
    if (doc.contains("vcs")) sp.vcs = doc.at("vcs").get<int>();
    if (doc.contains("buf_flits_per_vc"))
        sp.buf_flits_per_vc = doc.at("buf_flits_per_vc").get<int>();
    if (doc.contains("router_latency_cycles"))
        sp.router_latency_cycles = doc.at("router_latency_cycles").get<int>();
    if (doc.contains("phy_latency_cycles"))
        sp.phy_latency_cycles = doc.at("phy_latency_cycles").get<int>();
    if (doc.contains("warmup_cycles"))
        sp.warmup_cycles = doc.at("warmup_cycles").get<long long>();
    if (doc.contains("measure_cycles"))
        sp.measure_cycles = doc.at("measure_cycles").get<long long>();
    if (doc.contains("drain_cycle_cap"))
        sp.drain_cycle_cap = doc.at("drain_cycle_cap").get<long long>();
    if (doc.contains("packet_flits")) sp.packet_flits = doc.at("packet_flits").get<int>();
    if (doc.contains("sat_accept_frac"))
        sp.sat_accept_frac = doc.at("sat_accept_frac").get<double>();
    if (doc.contains("sat_latency_mult"))
        sp.sat_latency_mult = doc.at("sat_latency_mult").get<double>();
    if (doc.contains("sat_resolution"))
        sp.sat_resolution = doc.at("sat_resolution").get<int>();
}

bool perfect_square(int n, int& s) {
    if (n < 1) return false;
    s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    while (s > 0 && s * s > n) --s;
    while ((s + 1) * (s + 1) <= n) ++s;
    return s >= 1 && s * s == n;
}

bool centered_hex(int n, int& k) {
    for (k = 1; 3 * k * k + 3 * k + 1 <= n; ++k)
        if (3 * k * k + 3 * k + 1 == n) return true;
    return false;
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void append_note(std::string& notes, const std::string& add) {
    if (add.empty()) return;
    if (!notes.empty()) notes += "; ";
    notes += add;
}

// Everything reusable across the substrates and patterns of one (family, N).
struct PointPrep {
    std::shared_ptr<PointBundle> bundle; // null when skipped
    ValidationReport report;
    std::string validation_note; // non-empty when the reference check failed
    std::string skip;            // non-empty when the point cannot be built
};

std::string describe_failure(const ValidationReport& rep) {
    if (!rep.note.empty()) return rep.note;
    for (const ColumnCheck& c : rep.columns)
        if (!c.pass)
            return c.column + " " + fmt_num(c.measured) + " vs " + fmt_num(c.expected) +
                   " +-" + fmt_num(c.tolerance);
    return "failed";
}

} // namespace

ExperimentConfig experiment_config_from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw ParseError("invalid config document: not parseable");
    ExperimentConfig cfg;
    try {
        require_keys(doc, "config",
                     {"families", "chiplet_counts", "substrates", "arrangement",
                      "kind_scheme", "patterns", "tech", "sim", "phy_policy",
                      "output_dir", "latency_load_frac", "seed", "jobs"});
        if (doc.contains("families"))
            cfg.families = doc.at("families").get<std::vector<std::string>>();
        if (doc.contains("chiplet_counts"))
            cfg.chiplet_counts = doc.at("chiplet_counts").get<std::vector<int>>();
        if (doc.contains("substrates"))
            cfg.substrates = doc.at("substrates").get<std::vector<std::string>>();
        if (doc.contains("arrangement"))
            cfg.arrangement = doc.at("arrangement").get<std::string>();
        if (doc.contains("kind_scheme"))
            cfg.kind_scheme = doc.at("kind_scheme").get<std::string>();
        if (doc.contains("patterns"))
            cfg.patterns = doc.at("patterns").get<std::vector<std::string>>();
        if (doc.contains("tech"))
            for (auto it = doc.at("tech").begin(); it != doc.at("tech").end(); ++it)
                cfg.tech_overrides[it.key()] = it.value().get<double>();
        if (doc.contains("sim")) apply_sim_overrides(cfg.sim, doc.at("sim"));
        if (doc.contains("phy_policy"))
            cfg.phy_policy = phy_policy_from_string(doc.at("phy_policy").get<std::string>());
        if (doc.contains("output_dir"))
            cfg.output_dir = doc.at("output_dir").get<std::string>();
        if (doc.contains("latency_load_frac"))
            cfg.latency_load_frac = doc.at("latency_load_frac").get<double>();
        if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("jobs")) cfg.jobs = doc.at("jobs").get<int>();

        for (const std::string& f : cfg.families)
            if (topology_registry().find(f) == topology_registry().end())
                throw ParseError("unknown family '" + f + "'");
        for (const std::string& s : cfg.substrates) (void)tech_from_substrate(s);
        for (const std::string& p : cfg.patterns) (void)traffic_pattern_from_string(p);
        if (cfg.arrangement != "auto" && cfg.arrangement != "grid" &&
            cfg.arrangement != "hex_block" && cfg.arrangement != "hex_spiral")
            throw ParseError("unknown arrangement '" + cfg.arrangement + "'");
        (void)kind_scheme_from_string(cfg.kind_scheme);
        for (int n : cfg.chiplet_counts)
            if (n < 2) throw ParseError("chiplet counts must be at least 2");
        if (!(cfg.latency_load_frac > 0.0 && cfg.latency_load_frac <= 1.0))
            throw ParseError("latency_load_frac must be in (0, 1]");
        if (cfg.jobs < 1) throw ParseError("jobs must be at least 1");
        // Dry-run the overrides so a typo fails at load time.
        TechParams probe = tech_from_substrate(cfg.substrates.empty()
                                                   ? std::string("organic")
                                                   : cfg.substrates.front());
        for (const auto& [k, v] : cfg.tech_overrides) apply_tech_override(probe, k, v);
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid config document: ") + e.what());
    }
    return cfg;
}

ShapeChoice resolve_shape(TopologyKind kind, int n, const std::string& mode) {
    ShapeChoice c;
    const bool hex =
        kind == TopologyKind::hexa_mesh || kind == TopologyKind::folded_hexa_torus;
    int s = 0;
    int k = 0;
    if (mode == "hex_spiral") {
        if (!centered_hex(n, k)) {
            c.skip = "chiplet count " + std::to_string(n) +
                     " is not a centered hexagon count";
            return c;
        }
        c.arrangement = Arrangement::hex_spiral;
        c.dims.rings = k;
        return c;
    }
    if (mode == "auto" && hex && centered_hex(n, k)) {
        c.arrangement = Arrangement::hex_spiral;
        c.dims.rings = k;
        return c;
    }
    if (mode == "hex_block" || (mode == "auto" && hex)) {
        if (!perfect_square(n, s)) {
            c.skip = "no square hex block for chiplet count " + std::to_string(n);
            return c;
        }
        c.arrangement = Arrangement::hex_block;
        c.dims = {s, s, 0};
        return c;
    }
    if (perfect_square(n, s)) {
        c.arrangement = Arrangement::grid;
        c.dims = {s, s, 0};
        return c;
    }
    if (kind == TopologyKind::hypercube && power_of_two(n)) {
        int e = 0;
        while ((1 << (e + 1)) <= n) ++e;
        c.arrangement = Arrangement::grid;
        c.dims.rows = 1 << (e / 2);
        c.dims.cols = n / c.dims.rows;
        return c;
    }
    c.skip = "chiplet count " + std::to_string(n) + " is not a perfect square";
    return c;
}

PointBundle build_point(TopologyKind kind, int n, const std::string& arrangement_mode,
                        KindScheme scheme, PhyPolicy policy, double chiplet_area_mm2,
                        double spacing_mm) {
    ShapeChoice c = resolve_shape(kind, n, arrangement_mode);
    if (!c.skip.empty()) throw ValidationError(c.skip);
    Placement p = build_placement(c.arrangement, c.dims, chiplet_area_mm2, spacing_mm);
    assign_kinds(p, scheme);
    PointBundle b{generate_topology(kind, std::move(p), policy), {}, {}};
    b.metrics = graph_metrics(b.topology);
    b.routing = build_routing(b.topology);
    return b;
}

std::string results_csv_header() {
    return "family,N,substrate,pattern,T_r,T_a_bits_per_s,avg_latency_ns,diameter,"
           "radix,max_range,L_hat_mm,area_mm2_per_chiplet,power_w,skipped_reason";
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
    SweepResult out;

    // Geometry comes from the (overridden) tech parameters; it is shared by
    // all substrates here because overrides apply uniformly.
    TechParams geo_tech = tech_from_substrate(
        cfg.substrates.empty() ? std::string("organic") : cfg.substrates.front());
    for (const auto& [k, v] : cfg.tech_overrides) apply_tech_override(geo_tech, k, v);

    // Build every unique (family, N) once, in deterministic order.
    std::map<std::pair<std::string, int>, PointPrep> prep;
    for (const std::string& family : cfg.families) {
        TopologyKind kind = topology_kind_from_string(family);
        KindScheme scheme = kind_scheme_from_string(cfg.kind_scheme);
        for (int n : cfg.chiplet_counts) {
            auto key = std::make_pair(family, n);
            if (prep.count(key)) continue;
            PointPrep pp;
            try {
                pp.bundle = std::make_shared<PointBundle>(
                    build_point(kind, n, cfg.arrangement, scheme, cfg.phy_policy,
                                geo_tech.chiplet_area_mm2, geo_tech.spacing_mm));
                pp.report = check_table1(kind, pp.bundle->metrics, n);
                if (!pp.report.pass)
                    pp.validation_note = "reference check: " + describe_failure(pp.report);
            } catch (const Error& e) {
                pp.skip = e.what();
            }
            prep.emplace(key, std::move(pp));
        }
    }

    // Flatten the grid in output order.
    struct Point {
        std::string family;
        int n;
        std::string substrate;
        std::string pattern;
        const PointPrep* pp;
    };
    std::vector<Point> points;
    for (const std::string& family : cfg.families)
        for (int n : cfg.chiplet_counts)
            for (const std::string& substrate : cfg.substrates)
                for (const std::string& pattern : cfg.patterns)
                    points.push_back(
                        {family, n, substrate, pattern, &prep.at({family, n})});

    out.rows.resize(points.size());
    auto run_point = [&](std::size_t i) {
        const Point& pt = points[i];
        ResultRow row;
        row.family = pt.family;
        row.n = pt.n;
        row.substrate = pt.substrate;
        row.pattern = pt.pattern;
        if (!pt.pp->skip.empty()) {
            row.skipped_reason = pt.pp->skip;
            out.rows[i] = std::move(row);
            return;
        }
        const PointBundle& b = *pt.pp->bundle;
        const GraphMetrics& m = b.metrics;
        row.diameter = m.diameter;
        row.radix = m.radix;
        row.max_range = m.max_range;
        row.l_hat_mm = m.max_length_mm;
        append_note(row.skipped_reason, pt.pp->validation_note);
        try {
            TechParams tech = tech_from_substrate(pt.substrate);
            for (const auto& [k, v] : cfg.tech_overrides) apply_tech_override(tech, k, v);
            SimParams sp = cfg.sim;
            sp.seed = cfg.seed;
            // Keep the analytic latency model in step with the simulated
            // pipeline when either side is overridden.
            tech.router_latency_ns = sp.router_latency_cycles * tech.cycle_time_ns;
            tech.phy_latency_ns = sp.phy_latency_cycles * tech.cycle_time_ns;
            RateTable rates = default_rate_table(pt.substrate);
            row.area_mm2_per_chiplet = chiplet_area_mm2(tech, m.radix);
            TrafficSpec spec;
            spec.pattern = traffic_pattern_from_string(pt.pattern);

            SaturationResult sat =
                find_saturation(b.topology, b.routing.table, tech, rates, spec, sp);
            row.t_r = sat.rate;
            row.t_a_bits_per_s = absolute_throughput_bits_per_s(
                tech, rates, sat.rate, m.radix, m.max_length_mm);
            std::vector<double> per_link_bits_per_s(b.topology.links.size(), 0.0);
            if (sat.rate > 0.0) {
                SimStats st = simulate(b.topology, b.routing.table, tech, rates, spec,
                                       sp, cfg.latency_load_frac * sat.rate);
                row.avg_latency_ns = st.avg_latency_ns;
                const double window_s =
                    static_cast<double>(sp.measure_cycles) * tech.cycle_time_ns * 1e-9;
                for (std::size_t li = 0; li < b.topology.links.size(); ++li) {
                    const Link& l = b.topology.links[li];
                    per_link_bits_per_s[li] =
                        (st.per_channel_bits[b.routing.cdg.channel(l.a, l.b)] +
                         st.per_channel_bits[b.routing.cdg.channel(l.b, l.a)]) /
                        window_s;
                }
            } else {
                append_note(row.skipped_reason, sat.note);
            }
            row.power_w = system_power_w(tech, pt.n, per_link_bits_per_s);
        } catch (const Error& e) {
            row.skipped_reason = e.what();
        }
        out.rows[i] = std::move(row);
    };

    int jobs = std::clamp(cfg.jobs, 1, 8);
    if (jobs <= 1 || points.size() <= 1) {
        for (std::size_t i = 0; i < points.size(); ++i) run_point(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < points.size();
                     i = next.fetch_add(1))
                    run_point(i);
            });
        for (std::thread& th : pool) th.join();
    }

    // Assemble the three CSV documents (single deterministic collector).
    std::string res = results_csv_header() + "\n";
    for (const ResultRow& r : out.rows) {
        res += csv_escape(r.family) + "," + std::to_string(r.n) + "," + r.substrate +
               "," + r.pattern + "," + fmt_num(r.t_r) + "," +
               fmt_num(r.t_a_bits_per_s) + "," + fmt_num(r.avg_latency_ns) + "," +
               std::to_string(r.diameter) + "," + std::to_string(r.radix) + "," +
               std::to_string(r.max_range) + "," + fmt_num(r.l_hat_mm) + "," +
               fmt_num(r.area_mm2_per_chiplet) + "," + fmt_num(r.power_w) + "," +
               csv_escape(r.skipped_reason) + "\n";
    }
    out.results_csv = std::move(res);

    std::string val = "family,N,column,measured,expected,tolerance,pass\n";
    std::string shp = "family,N,arrangement,rows,cols,rings\n";
    for (const std::string& family : cfg.families)
        for (int n : cfg.chiplet_counts) {
            const PointPrep& pp = prep.at({family, n});
            if (!pp.skip.empty()) continue;
            out.validations.push_back(pp.report);
            if (pp.report.columns.empty())
                val += family + "," + std::to_string(n) + ",note: " + pp.report.note +
                       ",0,0,0,false\n";
            for (const ColumnCheck& c : pp.report.columns)
                val += family + "," + std::to_string(n) + "," + c.column + "," +
                       fmt_num(c.measured) + "," + fmt_num(c.expected) + "," +
                       fmt_num(c.tolerance) + "," + (c.pass ? "true" : "false") + "\n";
            const Placement& p = pp.bundle->topology.placement;
            shp += family + "," + std::to_string(n) + "," +
                   to_string(p.arrangement) + "," + std::to_string(p.rows) + "," +
                   std::to_string(p.cols) + "," + std::to_string(p.rings) + "\n";
        }
    out.validation_csv = std::move(val);
    out.shapes_csv = std::move(shp);

    std::string dir = cfg.output_dir;
    if (const char* env = std::getenv("ICINET_OUTPUT_DIR"); env && *env) dir = env;
    if (!dir.empty()) {
        std::filesystem::create_directories(dir);
        write_text_file(dir + "/results.csv", out.results_csv);
        write_text_file(dir + "/validation.csv", out.validation_csv);
        write_text_file(dir + "/shapes.csv", out.shapes_csv);
        out.output_dir = dir;
    }
    return out;
}

} // namespace ici
