#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ici/placement.hpp"

namespace ici {

enum class TopologyKind {
    mesh,
    torus,
    folded_torus,
    hexa_mesh,
    folded_hexa_torus,
    octa_mesh,
    folded_octa_torus,
    hypercube,
    flattened_butterfly,
    honeycomb_mesh,
    honeycomb_torus,
};

const char* to_string(TopologyKind k);
TopologyKind topology_kind_from_string(const std::string& s);
std::vector<std::string> known_topology_names();

struct Link {
    int a = 0; // a < b
    int b = 0;
    double length_mm = 0.0;
    int range = 0;
};

struct Topology {
    TopologyKind kind = TopologyKind::mesh;
    Placement placement;
    PhyPolicy phy_policy = PhyPolicy::edge;
    std::vector<Link> links;                    // sorted by (a, b)
    std::vector<std::vector<int>> neighbors;    // site -> sorted neighbor sites

    int count() const { return placement.count(); }
    double max_length_mm() const;
};

// Builds the link set of one topology family over a placement. Families and
// their placement requirements:
//   mesh/torus/folded_torus/octa_mesh/folded_octa_torus/hypercube/
//   flattened_butterfly/honeycomb_mesh/honeycomb_torus: grid
//   hexa_mesh/folded_hexa_torus: hex_block or hex_spiral
// hypercube needs a power-of-two site count; folded_torus, folded_octa_torus
// and honeycomb_torus need even side lengths.
Topology generate_topology(TopologyKind kind, Placement placement,
                           PhyPolicy policy = PhyPolicy::edge);

struct GraphMetrics {
    int diameter = 0;
    double avg_hops = 0.0; // over ordered pairs, excluding self
    int radix = 0;         // max degree
    int max_range = 0;
    double max_length_mm = 0.0;
};

// BFS over the full graph; throws if disconnected.
GraphMetrics graph_metrics(const Topology& t);

// Closed-form reference values per family. Entries exist for families that
// are not generated yet so their expectations stay available for validation.
struct ReferenceRow {
    std::string family;
    std::function<double(double)> diameter; // of N
    std::function<double(double)> radix;
    std::function<double(double)> range;
    bool exact = false;       // zero tolerance at compatible N
    bool implemented = false;
};

const std::vector<ReferenceRow>& reference_rows();
const ReferenceRow* reference_row(const std::string& family);

struct ColumnCheck {
    std::string column;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct ValidationReport {
    std::string family;
    int n = 0;
    std::vector<ColumnCheck> columns;
    bool pass = false;
    std::string note;
};

// Compares measured metrics with the family's reference row. Exact families
// get zero tolerance, the hex/honeycomb families one hop.
ValidationReport check_table1(TopologyKind kind, const GraphMetrics& m, int n);

// Generator registry keyed by family name; new families plug in here.
using TopologyGenerator = std::function<Topology(const Placement&, PhyPolicy)>;
const std::map<std::string, TopologyGenerator>& topology_registry();

} // namespace ici
