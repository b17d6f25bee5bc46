#pragma once

#include <string>
#include <vector>

namespace ici {

enum class Arrangement { grid, hex_block, hex_spiral };
enum class ChipletKind { compute, memory, io };
enum class KindScheme { homogeneous, mem_columns, trace_cmi };
enum class PhyPolicy { edge, center };

const char* to_string(Arrangement a);
const char* to_string(ChipletKind k);
const char* to_string(KindScheme s);
const char* to_string(PhyPolicy p);
Arrangement arrangement_from_string(const std::string& s);
KindScheme kind_scheme_from_string(const std::string& s);
PhyPolicy phy_policy_from_string(const std::string& s);

struct ChipletSite {
    int id = 0;
    int row = 0;        // hex_spiral: 0..2k top to bottom; others: grid row
    int col = 0;        // hex_spiral: position within the row, from the left
    ChipletKind kind = ChipletKind::compute;
    double x_mm = 0.0;  // center
    double y_mm = 0.0;
};

// Axial coordinates on the triangular lattice used by the hex arrangements.
// Hop distance between sites is (|dq| + |dr| + |dq+dr|) / 2.
struct Axial {
    int q = 0;
    int r = 0;
};

struct PlacementDims {
    int rows = 0;  // grid / hex_block
    int cols = 0;
    int rings = 0; // hex_spiral: hexagon radius, N = 3k^2 + 3k + 1
};

struct Placement {
    Arrangement arrangement = Arrangement::grid;
    int rows = 0;
    int cols = 0;
    int rings = 0;
    double chiplet_area_mm2 = 0.0;
    double spacing_mm = 0.0;
    double side_mm = 0.0;   // sqrt(chiplet_area_mm2)
    double pitch_mm = 0.0;  // side + spacing
    std::vector<ChipletSite> sites;

    int count() const { return static_cast<int>(sites.size()); }
    bool is_hex() const { return arrangement != Arrangement::grid; }
    const ChipletSite& site(int id) const;
    Axial axial(int id) const; // hex arrangements only
};

// Lays out square chiplets of the given area with uniform spacing.
// grid: row-major ids. hex_block: row-major, odd rows shifted right by
// pitch/2. hex_spiral: centered hexagon, ids spiral outward from the center.
Placement build_placement(Arrangement arrangement, PlacementDims dims,
                          double chiplet_area_mm2, double spacing_mm);

// Tags each site with a chiplet kind.
//  homogeneous: all compute.
//  mem_columns: leftmost and rightmost site of every row are memory.
//  trace_cmi:   top and bottom rows are io first, then the leftmost and
//               rightmost remaining site of every other row are memory.
Placement assign_kinds(Placement placement, KindScheme scheme);

// Number of chiplets a direct link passes over: grid uses Chebyshev distance
// minus one, hex arrangements use triangular-lattice hop distance minus one.
int link_range(const Placement& p, int a, int b);

// Wire length of a direct link. center: center-to-center Euclidean distance.
// edge: center distance minus one chiplet side, never below spacing_mm.
double link_length_mm(const Placement& p, int a, int b, PhyPolicy policy);

int hex_hop_distance(Axial a, Axial b);

} // namespace ici
