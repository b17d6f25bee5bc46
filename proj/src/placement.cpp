#include "ici/placement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "ici/errors.hpp"

namespace ici {

const char* to_string(Arrangement a) {
    switch (a) {
        case Arrangement::grid: return "grid";
        case Arrangement::hex_block: return "hex_block";
        case Arrangement::hex_spiral: return "hex_spiral";
    }
    return "?";
}

const char* to_string(ChipletKind k) {
    switch (k) {
        case ChipletKind::compute: return "compute";
        case ChipletKind::memory: return "memory";
        case ChipletKind::io: return "io";
    }
    return "?";
}

const char* to_string(KindScheme s) {
    switch (s) {
        case KindScheme::homogeneous: return "homogeneous";
        case KindScheme::mem_columns: return "mem_columns";
        case KindScheme::trace_cmi: return "trace_cmi";
    }
    return "?";
}

const char* to_string(PhyPolicy p) {
    return p == PhyPolicy::edge ? "edge" : "center";
}

Arrangement arrangement_from_string(const std::string& s) {
    if (s == "grid") return Arrangement::grid;
    if (s == "hex_block") return Arrangement::hex_block;
    if (s == "hex_spiral") return Arrangement::hex_spiral;
    throw ValidationError("unknown arrangement '" + s +
                          "' (known: grid, hex_block, hex_spiral)");
}

KindScheme kind_scheme_from_string(const std::string& s) {
    if (s == "homogeneous") return KindScheme::homogeneous;
    if (s == "mem_columns") return KindScheme::mem_columns;
    if (s == "trace_cmi") return KindScheme::trace_cmi;
    throw ValidationError("unknown kind scheme '" + s +
                          "' (known: homogeneous, mem_columns, trace_cmi)");
}

PhyPolicy phy_policy_from_string(const std::string& s) {
    if (s == "edge") return PhyPolicy::edge;
    if (s == "center") return PhyPolicy::center;
    throw ValidationError("unknown phy policy '" + s + "' (known: edge, center)");
}

const ChipletSite& Placement::site(int id) const {
    if (id < 0 || id >= count())
        throw ValidationError("site id " + std::to_string(id) + " out of range");
    return sites[static_cast<size_t>(id)];
}

Axial Placement::axial(int id) const {
    const ChipletSite& s = site(id);
    if (arrangement == Arrangement::hex_block) {
        // odd rows sit half a pitch to the right; q = col - floor(row/2) maps
        // the brick pattern onto the triangular lattice exactly
        return Axial{s.col - s.row / 2, s.row};
    }
    if (arrangement == Arrangement::hex_spiral) {
        int r = s.row - rings;
        int qmin = std::max(-rings, -r - rings);
        return Axial{s.col + qmin, r};
    }
    throw ValidationError("axial coordinates are defined for hex arrangements only");
}

int hex_hop_distance(Axial a, Axial b) {
    int dq = b.q - a.q;
    int dr = b.r - a.r;
    return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) / 2;
}

namespace {

void place_brick_rows(Placement& p, bool shift_odd) {
    p.sites.reserve(static_cast<size_t>(p.rows) * p.cols);
    int id = 0;
    for (int r = 0; r < p.rows; ++r) {
        double xoff = (shift_odd && (r % 2 == 1)) ? p.pitch_mm * 0.5 : 0.0;
        for (int c = 0; c < p.cols; ++c) {
            ChipletSite s;
            s.id = id++;
            s.row = r;
            s.col = c;
            s.x_mm = c * p.pitch_mm + xoff;
            s.y_mm = r * p.pitch_mm;
            p.sites.push_back(s);
        }
    }
}

void place_hex_spiral(Placement& p) {
    int k = p.rings;
    p.sites.reserve(static_cast<size_t>(3 * k * k + 3 * k + 1));
    // ring walk: six corner-to-corner segments, j steps each, clockwise from
    // the top corner (0, -j)
    static const int dq[6] = {1, 0, -1, -1, 0, 1};
    static const int dr[6] = {0, 1, 1, 0, -1, -1};
    auto push = [&](int q, int r) {
        ChipletSite s;
        s.id = p.count();
        s.row = r + k;
        int qmin = std::max(-k, -r - k);
        s.col = q - qmin;
        s.x_mm = (q + r * 0.5) * p.pitch_mm;
        s.y_mm = r * p.pitch_mm;
        p.sites.push_back(s);
    };
    push(0, 0);
    for (int j = 1; j <= k; ++j) {
        int q = 0, r = -j;
        for (int dir = 0; dir < 6; ++dir) {
            for (int step = 0; step < j; ++step) {
                push(q, r);
                q += dq[dir];
                r += dr[dir];
            }
        }
    }
}

// Sites of one row ordered left to right.
std::vector<std::vector<int>> rows_of(const Placement& p) {
    std::map<int, std::vector<int>> rows;
    for (const ChipletSite& s : p.sites) rows[s.row].push_back(s.id);
    std::vector<std::vector<int>> out;
    out.reserve(rows.size());
    for (auto& [row, ids] : rows) {
        std::sort(ids.begin(), ids.end(), [&](int a, int b) {
            return p.sites[static_cast<size_t>(a)].col < p.sites[static_cast<size_t>(b)].col;
        });
        out.push_back(std::move(ids));
    }
    return out;
}

} // namespace

Placement build_placement(Arrangement arrangement, PlacementDims dims,
                          double chiplet_area_mm2, double spacing_mm) {
    if (chiplet_area_mm2 <= 0.0)
        throw ValidationError("chiplet_area_mm2 must be positive");
    if (spacing_mm < 0.0)
        throw ValidationError("spacing_mm must be non-negative");

    Placement p;
    p.arrangement = arrangement;
    p.chiplet_area_mm2 = chiplet_area_mm2;
    p.spacing_mm = spacing_mm;
    p.side_mm = std::sqrt(chiplet_area_mm2);
    p.pitch_mm = p.side_mm + spacing_mm;

    switch (arrangement) {
        case Arrangement::grid:
        case Arrangement::hex_block:
            if (dims.rows <= 0 || dims.cols <= 0)
                throw ValidationError("rows and cols must be positive, got " +
                                      std::to_string(dims.rows) + "x" +
                                      std::to_string(dims.cols));
            p.rows = dims.rows;
            p.cols = dims.cols;
            place_brick_rows(p, arrangement == Arrangement::hex_block);
            break;
        case Arrangement::hex_spiral:
            if (dims.rings <= 0)
                throw ValidationError("hex_spiral needs rings >= 1");
            p.rings = dims.rings;
            p.rows = 2 * dims.rings + 1;
            p.cols = 2 * dims.rings + 1; // longest (center) row
            place_hex_spiral(p);
            break;
    }
    return p;
}

Placement assign_kinds(Placement placement, KindScheme scheme) {
    for (ChipletSite& s : placement.sites) s.kind = ChipletKind::compute;
    if (scheme == KindScheme::homogeneous) return placement;

    auto rows = rows_of(placement);
    size_t nrows = rows.size();
    size_t min_row_len = placement.sites.size();
    for (const auto& r : rows) min_row_len = std::min(min_row_len, r.size());

    if (scheme == KindScheme::mem_columns) {
        if (min_row_len < 3)
            throw ValidationError("mem_columns needs at least 3 sites per row");
        for (const auto& r : rows) {
            placement.sites[static_cast<size_t>(r.front())].kind = ChipletKind::memory;
            placement.sites[static_cast<size_t>(r.back())].kind = ChipletKind::memory;
        }
        return placement;
    }

    // trace_cmi: io ring rows first, memory columns on the remaining rows
    if (nrows < 3 || min_row_len < 3)
        throw ValidationError("trace_cmi needs at least 3 rows and 3 sites per row");
    for (int id : rows.front())
        placement.sites[static_cast<size_t>(id)].kind = ChipletKind::io;
    for (int id : rows.back())
        placement.sites[static_cast<size_t>(id)].kind = ChipletKind::io;
    for (size_t i = 1; i + 1 < nrows; ++i) {
        placement.sites[static_cast<size_t>(rows[i].front())].kind = ChipletKind::memory;
        placement.sites[static_cast<size_t>(rows[i].back())].kind = ChipletKind::memory;
    }
    return placement;
}

int link_range(const Placement& p, int a, int b) {
    if (a == b) throw ValidationError("link endpoints must differ");
    const ChipletSite& sa = p.site(a);
    const ChipletSite& sb = p.site(b);
    if (p.arrangement == Arrangement::grid) {
        int d = std::max(std::abs(sa.row - sb.row), std::abs(sa.col - sb.col));
        return d - 1;
    }
    return hex_hop_distance(p.axial(a), p.axial(b)) - 1;
}

double link_length_mm(const Placement& p, int a, int b, PhyPolicy policy) {
    if (a == b) throw ValidationError("link endpoints must differ");
    const ChipletSite& sa = p.site(a);
    const ChipletSite& sb = p.site(b);
    double d = std::hypot(sa.x_mm - sb.x_mm, sa.y_mm - sb.y_mm);
    if (policy == PhyPolicy::center) return d;
    return std::max(d - p.side_mm, p.spacing_mm);
}

} // namespace ici
