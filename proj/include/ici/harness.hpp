#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ici/simcore.hpp"

namespace ici {

// Sweep configuration, loadable from a JSON file. Unknown keys are rejected
// so config typos fail loudly instead of silently running defaults.
struct ExperimentConfig {
    std::vector<std::string> families;   // empty -> header-only CSV
    std::vector<int> chiplet_counts{16, 36, 64, 100, 144, 196, 256};
    std::vector<std::string> substrates{"organic"};
    std::string arrangement{"auto"};     // auto | grid | hex_block | hex_spiral
    std::string kind_scheme{"homogeneous"};
    std::vector<std::string> patterns{"uniform"};
    std::map<std::string, double> tech_overrides; // TechParams numeric fields by name
    SimParams sim{};
    PhyPolicy phy_policy = PhyPolicy::edge;
    std::string output_dir{"results"};
    double latency_load_frac = 0.3; // latency is measured at this fraction of saturation
    std::uint64_t seed = 1;
    int jobs = 1;
};

ExperimentConfig experiment_config_from_json(const std::string& text);

// One sweep grid point. Every numeric column is filled unless skipped_reason
// explains why the point could not be built; a non-empty skipped_reason on a
// filled row is an advisory note (zero data rate, failed reference check).
struct ResultRow {
    std::string family;
    int n = 0;
    std::string substrate;
    std::string pattern;
    double t_r = 0.0;            // saturation injection rate, flits/core/cycle
    double t_a_bits_per_s = 0.0; // absolute per-chiplet injection bandwidth
    double avg_latency_ns = 0.0; // measured at latency_load_frac * t_r
    int diameter = 0;
    int radix = 0;
    int max_range = 0;
    double l_hat_mm = 0.0;       // longest link
    double area_mm2_per_chiplet = 0.0;
    double power_w = 0.0;
    std::string skipped_reason;
};

struct SweepResult {
    std::vector<ResultRow> rows;
    std::vector<ValidationReport> validations; // one per feasible (family, N)
    std::string results_csv;
    std::string validation_csv;
    std::string shapes_csv;
    std::string output_dir; // resolved directory, empty when nothing was written
};

// Placement shape chosen for a (family, N) grid point.
struct ShapeChoice {
    Arrangement arrangement = Arrangement::grid;
    PlacementDims dims{};
    std::string skip; // non-empty when no shape fits
};

// Picks the placement shape for a family at a chiplet count: hex families get
// a centered hexagon when N = 3k^2+3k+1, else a square hex block; grid
// families get a square grid; hypercube also accepts 2^a x 2^b rectangles.
// mode is one of auto | grid | hex_block | hex_spiral.
ShapeChoice resolve_shape(TopologyKind kind, int n, const std::string& mode);

// Placement -> topology -> metrics -> routing for one grid point.
// Throws ValidationError when the point is infeasible.
struct PointBundle {
    Topology topology;
    GraphMetrics metrics;
    RoutingBundle routing;
};

PointBundle build_point(TopologyKind kind, int n, const std::string& arrangement_mode,
                        KindScheme scheme, PhyPolicy policy,
                        double chiplet_area_mm2 = 74.0, double spacing_mm = 0.15);

std::string results_csv_header();

// Runs the whole grid: families x counts x substrates x patterns, rows in
// exactly that nesting order. Infeasible points become rows whose
// skipped_reason explains the skip; the sweep itself never aborts. When
// output_dir (or the ICINET_OUTPUT_DIR environment variable) names a
// directory, results.csv, validation.csv and shapes.csv are written there.
SweepResult run_sweep(const ExperimentConfig& cfg);

} // namespace ici
