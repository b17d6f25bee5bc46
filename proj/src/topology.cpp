#include "ici/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "ici/errors.hpp"

namespace ici {

const char* to_string(TopologyKind k) {
    switch (k) {
        case TopologyKind::mesh: return "mesh";
        case TopologyKind::torus: return "torus";
        case TopologyKind::folded_torus: return "folded_torus";
        case TopologyKind::hexa_mesh: return "hexa_mesh";
        case TopologyKind::folded_hexa_torus: return "folded_hexa_torus";
        case TopologyKind::octa_mesh: return "octa_mesh";
        case TopologyKind::folded_octa_torus: return "folded_octa_torus";
        case TopologyKind::hypercube: return "hypercube";
        case TopologyKind::flattened_butterfly: return "flattened_butterfly";
        case TopologyKind::honeycomb_mesh: return "honeycomb_mesh";
        case TopologyKind::honeycomb_torus: return "honeycomb_torus";
    }
    return "?";
}

std::vector<std::string> known_topology_names() {
    std::vector<std::string> out;
    for (const auto& [name, gen] : topology_registry()) out.push_back(name);
    return out;
}

TopologyKind topology_kind_from_string(const std::string& s) {
    static const std::map<std::string, TopologyKind> m = {
        {"mesh", TopologyKind::mesh},
        {"torus", TopologyKind::torus},
        {"folded_torus", TopologyKind::folded_torus},
        {"hexa_mesh", TopologyKind::hexa_mesh},
        {"folded_hexa_torus", TopologyKind::folded_hexa_torus},
        {"octa_mesh", TopologyKind::octa_mesh},
        {"folded_octa_torus", TopologyKind::folded_octa_torus},
        {"hypercube", TopologyKind::hypercube},
        {"flattened_butterfly", TopologyKind::flattened_butterfly},
        {"honeycomb_mesh", TopologyKind::honeycomb_mesh},
        {"honeycomb_torus", TopologyKind::honeycomb_torus},
    };
    auto it = m.find(s);
    if (it == m.end()) {
        std::string names;
        for (const auto& [name, kind] : m) names += (names.empty() ? "" : ", ") + name;
        throw ValidationError("unknown topology '" + s + "' (known: " + names + ")");
    }
    return it->second;
}

double Topology::max_length_mm() const {
    double m = 0.0;
    for (const Link& l : links) m = std::max(m, l.length_mm);
    return m;
}

namespace {

using LinkSet = std::set<std::pair<int, int>>;

void add_link(LinkSet& ls, int a, int b) {
    if (a == b) return;
    ls.insert({std::min(a, b), std::max(a, b)});
}

// Connects each node of an ordered lattice line to the node two steps ahead
// plus the pairs at both ends, turning the line into a ring whose neighbors
// stay at most two lattice steps apart.
void fold_line(LinkSet& ls, const std::vector<int>& line) {
    size_t n = line.size();
    if (n >= 2) {
        add_link(ls, line[0], line[1]);
        add_link(ls, line[n - 2], line[n - 1]);
    }
    for (size_t i = 0; i + 2 < n; ++i) add_link(ls, line[i], line[i + 2]);
}

// Maximal lattice lines grouped by an invariant key, ordered along the line.
std::vector<std::vector<int>> lines_by(const Placement& p,
                                       const std::function<int(int)>& key,
                                       const std::function<int(int)>& pos) {
    std::map<int, std::vector<int>> groups;
    for (const ChipletSite& s : p.sites) groups[key(s.id)].push_back(s.id);
    std::vector<std::vector<int>> out;
    out.reserve(groups.size());
    for (auto& [k, ids] : groups) {
        std::sort(ids.begin(), ids.end(),
                  [&](int a, int b) { return pos(a) < pos(b); });
        out.push_back(std::move(ids));
    }
    return out;
}

void require_grid(const Placement& p, TopologyKind kind) {
    if (p.arrangement != Arrangement::grid)
        throw ValidationError(std::string(to_string(kind)) + " needs a grid placement");
}

void require_hex(const Placement& p, TopologyKind kind) {
    if (!p.is_hex())
        throw ValidationError(std::string(to_string(kind)) +
                              " needs a hex_block or hex_spiral placement");
}

void require_even_sides(const Placement& p, TopologyKind kind) {
    if (p.rows % 2 != 0 || p.cols % 2 != 0)
        throw ValidationError(std::string(to_string(kind)) +
                              " needs even rows and cols, got " + std::to_string(p.rows) +
                              "x" + std::to_string(p.cols));
}

int grid_id(const Placement& p, int row, int col) {
    return row * p.cols + col;
}

LinkSet gen_mesh(const Placement& p) {
    LinkSet ls;
    for (int r = 0; r < p.rows; ++r)
        for (int c = 0; c < p.cols; ++c) {
            if (c + 1 < p.cols) add_link(ls, grid_id(p, r, c), grid_id(p, r, c + 1));
            if (r + 1 < p.rows) add_link(ls, grid_id(p, r, c), grid_id(p, r + 1, c));
        }
    return ls;
}

LinkSet gen_torus(const Placement& p) {
    LinkSet ls = gen_mesh(p);
    for (int r = 0; r < p.rows; ++r)
        if (p.cols > 2) add_link(ls, grid_id(p, r, 0), grid_id(p, r, p.cols - 1));
    for (int c = 0; c < p.cols; ++c)
        if (p.rows > 2) add_link(ls, grid_id(p, 0, c), grid_id(p, p.rows - 1, c));
    return ls;
}

LinkSet gen_folded_torus(const Placement& p) {
    LinkSet ls;
    auto rows = lines_by(p, [&](int id) { return p.sites[(size_t)id].row; },
                         [&](int id) { return p.sites[(size_t)id].col; });
    auto cols = lines_by(p, [&](int id) { return p.sites[(size_t)id].col; },
                         [&](int id) { return p.sites[(size_t)id].row; });
    for (const auto& line : rows) fold_line(ls, line);
    for (const auto& line : cols) fold_line(ls, line);
    return ls;
}

LinkSet gen_octa_mesh(const Placement& p) {
    LinkSet ls = gen_mesh(p);
    for (int r = 0; r + 1 < p.rows; ++r)
        for (int c = 0; c < p.cols; ++c) {
            if (c + 1 < p.cols) add_link(ls, grid_id(p, r, c), grid_id(p, r + 1, c + 1));
            if (c > 0) add_link(ls, grid_id(p, r, c), grid_id(p, r + 1, c - 1));
        }
    return ls;
}

LinkSet gen_folded_octa_torus(const Placement& p) {
    LinkSet ls = gen_folded_torus(p);
    auto diag_se = lines_by(p, [&](int id) {
        const ChipletSite& s = p.sites[(size_t)id];
        return s.col - s.row;
    }, [&](int id) { return p.sites[(size_t)id].row; });
    auto diag_sw = lines_by(p, [&](int id) {
        const ChipletSite& s = p.sites[(size_t)id];
        return s.col + s.row;
    }, [&](int id) { return p.sites[(size_t)id].row; });
    for (const auto& line : diag_se) fold_line(ls, line);
    for (const auto& line : diag_sw) fold_line(ls, line);
    return ls;
}

LinkSet gen_hexa_mesh(const Placement& p) {
    // six-neighborhood of the triangular lattice
    std::map<std::pair<int, int>, int> by_axial;
    for (const ChipletSite& s : p.sites) {
        Axial a = p.axial(s.id);
        by_axial[{a.q, a.r}] = s.id;
    }
    static const int dq[3] = {1, 0, -1};
    static const int dr[3] = {0, 1, 1};
    LinkSet ls;
    for (const ChipletSite& s : p.sites) {
        Axial a = p.axial(s.id);
        for (int d = 0; d < 3; ++d) {
            auto it = by_axial.find({a.q + dq[d], a.r + dr[d]});
            if (it != by_axial.end()) add_link(ls, s.id, it->second);
        }
    }
    return ls;
}

LinkSet gen_folded_hexa_torus(const Placement& p) {
    // Fold every maximal lattice line of each of the three axis families.
    // Each line becomes a ring, so the result is the hex torus re-embedded
    // with all neighbors at most two lattice hops apart.
    LinkSet ls;
    auto q_of = [&](int id) { return p.axial(id).q; };
    auto r_of = [&](int id) { return p.axial(id).r; };
    auto s_of = [&](int id) { Axial a = p.axial(id); return a.q + a.r; };
    for (const auto& line : lines_by(p, r_of, q_of)) fold_line(ls, line);
    for (const auto& line : lines_by(p, q_of, r_of)) fold_line(ls, line);
    for (const auto& line : lines_by(p, s_of, r_of)) fold_line(ls, line);
    return ls;
}

LinkSet gen_hypercube(const Placement& p) {
    int n = p.count();
    if ((n & (n - 1)) != 0)
        throw ValidationError("hypercube needs a power-of-two site count, got " +
                              std::to_string(n));
    LinkSet ls;
    for (int i = 0; i < n; ++i)
        for (int bit = 1; bit < n; bit <<= 1) add_link(ls, i, i ^ bit);
    return ls;
}

LinkSet gen_flattened_butterfly(const Placement& p) {
    LinkSet ls;
    for (int r = 0; r < p.rows; ++r)
        for (int c1 = 0; c1 < p.cols; ++c1)
            for (int c2 = c1 + 1; c2 < p.cols; ++c2)
                add_link(ls, grid_id(p, r, c1), grid_id(p, r, c2));
    for (int c = 0; c < p.cols; ++c)
        for (int r1 = 0; r1 < p.rows; ++r1)
            for (int r2 = r1 + 1; r2 < p.rows; ++r2)
                add_link(ls, grid_id(p, r1, c), grid_id(p, r2, c));
    return ls;
}

// Degree-3 brick pattern: full rows, vertical link where row+col is even.
LinkSet gen_honeycomb_mesh(const Placement& p) {
    LinkSet ls;
    for (int r = 0; r < p.rows; ++r)
        for (int c = 0; c < p.cols; ++c) {
            if (c + 1 < p.cols) add_link(ls, grid_id(p, r, c), grid_id(p, r, c + 1));
            if (r + 1 < p.rows && (r + c) % 2 == 0)
                add_link(ls, grid_id(p, r, c), grid_id(p, r + 1, c));
        }
    return ls;
}

LinkSet gen_honeycomb_torus(const Placement& p) {
    LinkSet ls = gen_honeycomb_mesh(p);
    for (int r = 0; r < p.rows; ++r)
        if (p.cols > 2) add_link(ls, grid_id(p, r, 0), grid_id(p, r, p.cols - 1));
    // vertical wrap exactly where both boundary nodes still miss their
    // third link; consistent only for even row counts
    for (int c = 0; c < p.cols; ++c)
        if (c % 2 == 1 && p.rows > 2)
            add_link(ls, grid_id(p, 0, c), grid_id(p, p.rows - 1, c));
    return ls;
}

LinkSet build_links(TopologyKind kind, const Placement& p) {
    switch (kind) {
        case TopologyKind::mesh:
            require_grid(p, kind);
            return gen_mesh(p);
        case TopologyKind::torus:
            require_grid(p, kind);
            return gen_torus(p);
        case TopologyKind::folded_torus:
            require_grid(p, kind);
            require_even_sides(p, kind);
            return gen_folded_torus(p);
        case TopologyKind::hexa_mesh:
            require_hex(p, kind);
            return gen_hexa_mesh(p);
        case TopologyKind::folded_hexa_torus:
            require_hex(p, kind);
            if (p.arrangement == Arrangement::hex_block) require_even_sides(p, kind);
            return gen_folded_hexa_torus(p);
        case TopologyKind::octa_mesh:
            require_grid(p, kind);
            return gen_octa_mesh(p);
        case TopologyKind::folded_octa_torus:
            require_grid(p, kind);
            require_even_sides(p, kind);
            return gen_folded_octa_torus(p);
        case TopologyKind::hypercube:
            require_grid(p, kind);
            return gen_hypercube(p);
        case TopologyKind::flattened_butterfly:
            require_grid(p, kind);
            return gen_flattened_butterfly(p);
        case TopologyKind::honeycomb_mesh:
            require_grid(p, kind);
            return gen_honeycomb_mesh(p);
        case TopologyKind::honeycomb_torus:
            require_grid(p, kind);
            require_even_sides(p, kind);
            return gen_honeycomb_torus(p);
    }
    throw ValidationError("unhandled topology kind");
}

} // namespace

Topology generate_topology(TopologyKind kind, Placement placement, PhyPolicy policy) {
    if (placement.count() < 2)
        throw ValidationError("topology needs at least 2 sites");
    Topology t;
    t.kind = kind;
    t.phy_policy = policy;
    LinkSet ls = build_links(kind, placement);
    t.links.reserve(ls.size());
    t.neighbors.assign(static_cast<size_t>(placement.count()), {});
    for (const auto& [a, b] : ls) {
        Link l;
        l.a = a;
        l.b = b;
        l.length_mm = link_length_mm(placement, a, b, policy);
        l.range = link_range(placement, a, b);
        t.links.push_back(l);
        t.neighbors[static_cast<size_t>(a)].push_back(b);
        t.neighbors[static_cast<size_t>(b)].push_back(a);
    }
    for (auto& nb : t.neighbors) std::sort(nb.begin(), nb.end());
    t.placement = std::move(placement);
    return t;
}

GraphMetrics graph_metrics(const Topology& t) {
    int n = t.count();
    GraphMetrics m;
    long long hop_sum = 0;
    std::vector<int> dist(static_cast<size_t>(n));
    for (int s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[static_cast<size_t>(s)] = 0;
        std::deque<int> q{s};
        int seen = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (int v : t.neighbors[static_cast<size_t>(u)]) {
                if (dist[static_cast<size_t>(v)] < 0) {
                    dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + 1;
                    m.diameter = std::max(m.diameter, dist[static_cast<size_t>(v)]);
                    hop_sum += dist[static_cast<size_t>(v)];
                    ++seen;
                    q.push_back(v);
                }
            }
        }
        if (seen != n)
            throw ValidationError("topology is disconnected (site " + std::to_string(s) +
                                  " reaches " + std::to_string(seen) + " of " +
                                  std::to_string(n) + ")");
    }
    m.avg_hops = static_cast<double>(hop_sum) / (static_cast<double>(n) * (n - 1));
    for (const auto& nb : t.neighbors)
        m.radix = std::max(m.radix, static_cast<int>(nb.size()));
    for (const Link& l : t.links) {
        m.max_range = std::max(m.max_range, l.range);
        m.max_length_mm = std::max(m.max_length_mm, l.length_mm);
    }
    return m;
}

const std::vector<ReferenceRow>& reference_rows() {
    auto log2d = [](double n) { return std::log2(n); };
    auto sq = [](double n) { return std::sqrt(n); };
    static const std::vector<ReferenceRow> rows = {
        {"mesh", [sq](double n) { return 2 * sq(n) - 2; },
         [](double) { return 4; }, [](double) { return 0; }, true, true},
        {"torus", [sq](double n) { return 2 * std::floor(sq(n) / 2); },
         [](double) { return 4; }, [sq](double n) { return sq(n) - 2; }, true, true},
        {"hexa_mesh", [](double n) { return std::sqrt(12 * n - 3) / 3 - 1; },
         [](double) { return 6; }, [](double) { return 0; }, false, true},
        {"double_butterfly", [sq](double n) { return sq(n); },
         [](double) { return 4; }, [sq](double n) { return sq(n) / 2 - 1; }, false, false},
        {"butter_donut", [sq](double n) { return std::floor(2.0 / 3.0 * sq(n)); },
         [](double) { return 4; }, [sq](double n) { return sq(n) / 2 - 1; }, false, false},
        {"clus_cross_v1", [sq](double n) { return sq(n) - 1; },
         [](double) { return 4; }, [sq](double n) { return sq(n) - 2; }, false, false},
        {"clus_cross_v2", [sq](double n) { return std::ceil(3 * sq(n) / 4); },
         [](double) { return 4; }, [sq](double n) { return sq(n) - 2; }, false, false},
        {"kite_small", [sq](double n) { return sq(n) - 1; },
         [](double) { return 4; }, [](double) { return 0; }, false, false},
        {"kite_medium", [sq](double n) { return sq(n); },
         [](double) { return 4; }, [](double) { return 1; }, false, false},
        {"kite_large", [sq](double n) { return sq(n); },
         [](double) { return 4; }, [](double) { return 1; }, false, false},
        {"sid_mesh", [sq](double n) { return sq(n) - 1; },
         [](double) { return 4; }, [](double) { return 0; }, false, false},
        {"folded_torus", [sq](double n) { return 2 * std::floor(sq(n) / 2); },
         [](double) { return 4; }, [](double) { return 1; }, true, true},
        {"hypercube", log2d, log2d,
         [sq](double n) { return sq(n) / 2 - 1; }, true, true},
        {"flattened_butterfly", [](double) { return 2; },
         [sq](double n) { return 2 * sq(n) - 2; }, [sq](double n) { return sq(n) - 2; },
         true, true},
        {"honeycomb_mesh", [sq](double n) { return 1.63 * sq(n); },
         [](double) { return 3; }, [](double) { return 0; }, false, true},
        {"honeycomb_torus", [sq](double n) { return 0.81 * sq(n); },
         [](double) { return 3; }, [](double n) { return 3 * std::sqrt(n / 6) - 2; },
         false, true},
        {"folded_hexa_torus", [](double n) { return std::sqrt(12 * n - 3) / 6 + 0.5; },
         [](double) { return 6; }, [](double) { return 1; }, false, true},
    };
    return rows;
}

const ReferenceRow* reference_row(const std::string& family) {
    for (const ReferenceRow& r : reference_rows())
        if (r.family == family) return &r;
    return nullptr;
}

ValidationReport check_table1(TopologyKind kind, const GraphMetrics& m, int n) {
    ValidationReport rep;
    rep.family = to_string(kind);
    rep.n = n;
    const ReferenceRow* row = reference_row(rep.family);
    if (row == nullptr) {
        rep.pass = false;
        rep.note = "no reference row";
        return rep;
    }
    double tol = row->exact ? 0.0 : 1.0;
    auto add = [&](const std::string& col, double measured, double expected) {
        ColumnCheck c;
        c.column = col;
        c.measured = measured;
        c.expected = expected;
        c.tolerance = tol;
        c.pass = std::abs(measured - expected) <= tol + 1e-9;
        rep.columns.push_back(c);
    };
    double dn = static_cast<double>(n);
    add("diameter", m.diameter, row->diameter(dn));
    add("radix", m.radix, row->radix(dn));
    add("max_range", m.max_range, row->range(dn));
    rep.pass = true;
    for (const ColumnCheck& c : rep.columns) rep.pass = rep.pass && c.pass;
    return rep;
}

const std::map<std::string, TopologyGenerator>& topology_registry() {
    static const std::map<std::string, TopologyGenerator> reg = [] {
        std::map<std::string, TopologyGenerator> r;
        for (TopologyKind k : {TopologyKind::mesh, TopologyKind::torus,
                               TopologyKind::folded_torus, TopologyKind::hexa_mesh,
                               TopologyKind::folded_hexa_torus, TopologyKind::octa_mesh,
                               TopologyKind::folded_octa_torus, TopologyKind::hypercube,
                               TopologyKind::flattened_butterfly,
                               TopologyKind::honeycomb_mesh, TopologyKind::honeycomb_torus}) {
            r[to_string(k)] = [k](const Placement& p, PhyPolicy pol) {
                return generate_topology(k, p, pol);
            };
        }
        return r;
    }();
    return reg;
}

} // namespace ici
