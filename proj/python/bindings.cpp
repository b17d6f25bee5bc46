#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ici/errors.hpp"
#include "ici/harness.hpp"
#include "ici/serialize.hpp"

namespace py = pybind11;
using namespace ici;

namespace {

// One analyzed (family, N) grid point: placement, links, metrics, and
// deadlock-free routing, ready to simulate.
class Network {
public:
    Network(const std::string& family, int n, const std::string& arrangement,
            const std::string& substrate, const std::string& kind_scheme,
            const std::string& phy_policy)
        : bundle_(build_point(topology_kind_from_string(family), n, arrangement,
                              kind_scheme_from_string(kind_scheme),
                              phy_policy_from_string(phy_policy))),
          tech_(tech_from_substrate(substrate)),
          rates_(default_rate_table(substrate)),
          family_(family) {}

    py::dict metrics() const {
        const GraphMetrics& m = bundle_.metrics;
        py::dict d;
        d["family"] = family_;
        d["n"] = bundle_.topology.count();
        d["diameter"] = m.diameter;
        d["avg_hops"] = m.avg_hops;
        d["radix"] = m.radix;
        d["max_range"] = m.max_range;
        d["l_hat_mm"] = m.max_length_mm;
        return d;
    }

    py::dict verify() const {
        DeadlockReport r = verify_deadlock_free(bundle_.topology, bundle_.routing.cdg,
                                                bundle_.routing.turns,
                                                bundle_.routing.table);
        py::dict d;
        d["acyclic"] = r.acyclic;
        d["all_pairs_routed"] = r.all_pairs_routed;
        d["turns_legal"] = r.turns_legal;
        d["pairs_routed"] = r.pairs_routed;
        d["pairs_total"] = r.pairs_total;
        d["pass"] = r.pass;
        return d;
    }

    std::vector<int> route(int src, int dst) const {
        return bundle_.routing.table.route(src, dst);
    }

    py::dict simulate_at(double rate, const std::string& pattern, uint64_t seed,
                         int flits, long long warmup, long long measure) const {
        SimParams sp;
        sp.seed = seed;
        sp.packet_flits = flits;
        sp.warmup_cycles = warmup;
        sp.measure_cycles = measure;
        TrafficSpec spec;
        spec.pattern = traffic_pattern_from_string(pattern);
        SimStats st = simulate(bundle_.topology, bundle_.routing.table, tech_, rates_,
                               spec, sp, rate);
        py::dict d;
        d["offered_rate"] = st.offered_rate;
        d["accepted_rate"] = st.accepted_rate;
        d["avg_latency_ns"] = st.avg_latency_ns;
        d["p99_latency_ns"] = st.p99_latency_ns;
        d["delivered_packets"] = st.delivered_packets;
        d["avg_hops"] = st.avg_hops;
        d["deadlock"] = st.deadlock_flag;
        return d;
    }

    py::dict saturation(const std::string& pattern, uint64_t seed) const {
        SimParams sp;
        sp.seed = seed;
        TrafficSpec spec;
        spec.pattern = traffic_pattern_from_string(pattern);
        SaturationResult sat = find_saturation(bundle_.topology, bundle_.routing.table,
                                               tech_, rates_, spec, sp);
        py::dict d;
        d["rate"] = sat.rate;
        d["throughput_bits_per_s"] = absolute_throughput_bits_per_s(
            tech_, rates_, sat.rate, bundle_.metrics.radix,
            bundle_.metrics.max_length_mm);
        d["note"] = sat.note;
        return d;
    }

    py::dict reference_check() const {
        ValidationReport r = check_table1(bundle_.topology.kind, bundle_.metrics,
                                          bundle_.topology.count());
        py::dict d;
        d["applicable"] = !r.columns.empty();
        d["pass"] = r.pass;
        d["note"] = r.note;
        py::list cols;
        for (const ColumnCheck& c : r.columns) {
            py::dict cd;
            cd["column"] = c.column;
            cd["measured"] = c.measured;
            cd["expected"] = c.expected;
            cd["tolerance"] = c.tolerance;
            cd["pass"] = c.pass;
            cols.append(cd);
        }
        d["columns"] = cols;
        return d;
    }

    std::string placement_json() const {
        return placement_to_json(bundle_.topology.placement);
    }
    std::string topology_json() const { return topology_to_json(bundle_.topology); }
    std::string metrics_json() const { return metrics_to_json(bundle_.metrics); }
    std::string routes_json() const { return routes_to_json(bundle_.routing.table); }

private:
    PointBundle bundle_;
    TechParams tech_;
    RateTable rates_;
    std::string family_;
};

py::dict sweep_from_json(const std::string& config_text) {
    SweepResult res = run_sweep(experiment_config_from_json(config_text));
    py::dict d;
    d["results_csv"] = res.results_csv;
    d["validation_csv"] = res.validation_csv;
    d["shapes_csv"] = res.shapes_csv;
    d["output_dir"] = res.output_dir;
    d["row_count"] = res.rows.size();
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Chiplet interconnect toolkit core";

    py::class_<Network>(m, "Network",
                        "An analyzed topology grid point with routing attached")
        .def(py::init<const std::string&, int, const std::string&,
                      const std::string&, const std::string&, const std::string&>(),
             py::arg("family"), py::arg("n"), py::arg("arrangement") = "auto",
             py::arg("substrate") = "organic",
             py::arg("kind_scheme") = "homogeneous", py::arg("phy_policy") = "edge")
        .def("metrics", &Network::metrics)
        .def("verify", &Network::verify)
        .def("route", &Network::route, py::arg("src"), py::arg("dst"))
        .def("simulate", &Network::simulate_at, py::arg("rate"),
             py::arg("pattern") = "uniform", py::arg("seed") = 1,
             py::arg("flits") = 4, py::arg("warmup") = 5000,
             py::arg("measure") = 20000)
        .def("saturation", &Network::saturation, py::arg("pattern") = "uniform",
             py::arg("seed") = 1)
        .def("reference_check", &Network::reference_check)
        .def("placement_json", &Network::placement_json)
        .def("topology_json", &Network::topology_json)
        .def("metrics_json", &Network::metrics_json)
        .def("routes_json", &Network::routes_json);

    m.def("families", &known_topology_names, "names of the supported families");
    m.def("run_sweep", &sweep_from_json, py::arg("config_json"),
          "run an experiment sweep from a JSON config string");
    m.def(
        "wires_per_link",
        [](const std::string& substrate, int radix) {
            return wires_per_link(tech_from_substrate(substrate), radix);
        },
        py::arg("substrate"), py::arg("radix"));
    m.def(
        "rate_fraction",
        [](const std::string& substrate, double length_mm) {
            return rate_fraction(default_rate_table(substrate), length_mm);
        },
        py::arg("substrate"), py::arg("length_mm"));
    m.def(
        "chiplet_area_mm2",
        [](const std::string& substrate, int radix) {
            return chiplet_area_mm2(tech_from_substrate(substrate), radix);
        },
        py::arg("substrate"), py::arg("radix"));
    m.def(
        "link_bandwidth_bits_per_s",
        [](const std::string& substrate, int radix, double length_mm) {
            return link_bandwidth_bits_per_s(tech_from_substrate(substrate),
                                             default_rate_table(substrate), radix,
                                             length_mm);
        },
        py::arg("substrate"), py::arg("radix"), py::arg("length_mm"));

    // Base first: translators run in reverse registration order, so the
    // specific classes below win over this catch-all.
    py::register_exception<Error>(m, "IciError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<RoutingError>(m, "RoutingError", PyExc_RuntimeError);
}
