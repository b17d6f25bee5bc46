#include "ici/routing.hpp"

#include <algorithm>
#include <climits>
#include <limits>
#include <cstdint>
#include <queue>
#include <tuple>

#include "ici/errors.hpp"

namespace ici {

namespace {

// CSR view of the turn edges with a removable-edge mask.
struct TurnGraph {
    int n_channels = 0;
    std::vector<int> offsets;     // channel -> first edge index
    std::vector<int> out_channel; // edge -> out channel id (ascending per in)
    std::vector<char> forbidden;  // edge -> removed?

    static TurnGraph build(const Cdg& g) {
        TurnGraph tg;
        tg.n_channels = static_cast<int>(g.channels.size());
        tg.offsets.assign(tg.n_channels + 1, 0);
        for (const auto& [in, out] : g.turn_edges) ++tg.offsets[in + 1];
        for (int c = 0; c < tg.n_channels; ++c) tg.offsets[c + 1] += tg.offsets[c];
        tg.out_channel.resize(g.turn_edges.size());
        std::vector<int> cur(tg.offsets.begin(), tg.offsets.end() - 1);
        for (const auto& [in, out] : g.turn_edges) tg.out_channel[cur[in]++] = out;
        tg.forbidden.assign(g.turn_edges.size(), 0);
        return tg;
    }

    int edge_index(int in, int out) const {
        for (int e = offsets[in]; e < offsets[in + 1]; ++e)
            if (out_channel[e] == out) return e;
        return -1;
    }
};

struct SccResult {
    std::vector<int> comp; // -1 when excluded by the restriction mask
    int n_comps = 0;
};

// Iterative Tarjan; component ids come out in reverse topological order.
SccResult strongly_connected(const TurnGraph& tg, const std::vector<char>* restrict_to) {
    int n = tg.n_channels;
    SccResult r;
    r.comp.assign(n, -1);
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::pair<int, int>> dfs; // (channel, edge cursor)
    int next_index = 0;
    for (int s = 0; s < n; ++s) {
        if (index[s] != -1 || (restrict_to && !(*restrict_to)[s])) continue;
        index[s] = low[s] = next_index++;
        stack.push_back(s);
        on_stack[s] = 1;
        dfs.push_back({s, tg.offsets[s]});
        while (!dfs.empty()) {
            int u = dfs.back().first;
            int cursor = dfs.back().second;
            if (cursor < tg.offsets[u + 1]) {
                ++dfs.back().second;
                if (tg.forbidden[cursor]) continue;
                int v = tg.out_channel[cursor];
                if (restrict_to && !(*restrict_to)[v]) continue;
                if (index[v] == -1) {
                    index[v] = low[v] = next_index++;
                    stack.push_back(v);
                    on_stack[v] = 1;
                    dfs.push_back({v, tg.offsets[v]});
                } else if (on_stack[v]) {
                    low[u] = std::min(low[u], index[v]);
                }
            } else {
                if (low[u] == index[u]) {
                    int c = r.n_comps++;
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        r.comp[w] = c;
                        if (w == u) break;
                    }
                }
                dfs.pop_back();
                if (!dfs.empty()) {
                    int p = dfs.back().first;
                    low[p] = std::min(low[p], low[u]);
                }
            }
        }
    }
    return r;
}

// Allowed turn edges that sit inside a multi-channel strongly connected
// component; zero means the (restricted) graph is acyclic.
long long intra_scc_edges(const TurnGraph& tg, const SccResult& scc) {
    std::vector<int> size(scc.n_comps, 0);
    for (int c : scc.comp)
        if (c >= 0) ++size[c];
    long long cnt = 0;
    for (int u = 0; u < tg.n_channels; ++u) {
        if (scc.comp[u] < 0 || size[scc.comp[u]] < 2) continue;
        for (int e = tg.offsets[u]; e < tg.offsets[u + 1]; ++e)
            if (!tg.forbidden[e] && scc.comp[tg.out_channel[e]] == scc.comp[u]) ++cnt;
    }
    return cnt;
}

// Every ordered site pair reachable through allowed turns? Channel reach sets
// as site bitsets, shared per SCC, accumulated in reverse topological order.
bool all_pairs_reachable(const Cdg& g, const TurnGraph& tg) {
    int n_sites = g.n_sites;
    if (n_sites <= 1) return true;
    int nc = tg.n_channels;
    int words = (n_sites + 63) / 64;
    SccResult scc = strongly_connected(tg, nullptr);
    std::vector<uint64_t> reach(static_cast<size_t>(scc.n_comps) * words, 0);
    auto bits = [&](int comp) { return reach.data() + static_cast<size_t>(comp) * words; };
    for (int c = 0; c < nc; ++c) {
        int site = g.channels[c].to;
        bits(scc.comp[c])[site >> 6] |= 1ull << (site & 63);
    }
    // group channels by component; comp ids ascend in reverse topo order
    std::vector<int> order(nc);
    for (int c = 0; c < nc; ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scc.comp[a] < scc.comp[b]; });
    for (int u : order) {
        uint64_t* dst = bits(scc.comp[u]);
        for (int e = tg.offsets[u]; e < tg.offsets[u + 1]; ++e) {
            if (tg.forbidden[e]) continue;
            const uint64_t* src = bits(scc.comp[tg.out_channel[e]]);
            for (int w = 0; w < words; ++w) dst[w] |= src[w];
        }
    }
    std::vector<uint64_t> acc(words);
    int c = 0;
    for (int s = 0; s < n_sites; ++s) {
        std::fill(acc.begin(), acc.end(), 0);
        acc[s >> 6] |= 1ull << (s & 63);
        for (; c < nc && g.channels[c].from == s; ++c) {
            const uint64_t* src = bits(scc.comp[c]);
            for (int w = 0; w < words; ++w) acc[w] |= src[w];
        }
        for (int w = 0; w < words; ++w) {
            uint64_t want = (w == words - 1 && (n_sites & 63))
                                ? ((1ull << (n_sites & 63)) - 1)
                                : ~0ull;
            if ((acc[w] & want) != want) return false;
        }
    }
    return true;
}

bool is_acyclic(const TurnGraph& tg) {
    SccResult scc = strongly_connected(tg, nullptr);
    return intra_scc_edges(tg, scc) == 0;
}

void apply_turnset(TurnGraph& tg, const TurnSet& ts) {
    for (const auto& [in, out] : ts.forbidden) {
        int e = tg.edge_index(in, out);
        if (e >= 0) tg.forbidden[e] = 1;
    }
}

// ---- closed-form turn prohibitions ----------------------------------------

TurnSet west_first_turns(const Topology& t, const Cdg& g) {
    TurnSet ts;
    auto dx = [&](int c) {
        return t.placement.site(g.channels[c].to).col -
               t.placement.site(g.channels[c].from).col;
    };
    for (const auto& [in, out] : g.turn_edges)
        if (dx(in) >= 0 && dx(out) < 0) ts.forbidden.insert({in, out});
    return ts;
}

TurnSet ascending_dimension_turns(const Cdg& g) {
    auto dim = [&](int c) {
        unsigned x = static_cast<unsigned>(g.channels[c].from ^ g.channels[c].to);
        int d = 0;
        while (x > 1) {
            x >>= 1;
            ++d;
        }
        return d;
    };
    TurnSet ts;
    for (const auto& [in, out] : g.turn_edges)
        if (dim(out) <= dim(in)) ts.forbidden.insert({in, out});
    return ts;
}

TurnSet row_then_column_turns(const Topology& t, const Cdg& g) {
    auto row_move = [&](int c) {
        return t.placement.site(g.channels[c].from).row ==
               t.placement.site(g.channels[c].to).row;
    };
    TurnSet ts;
    for (const auto& [in, out] : g.turn_edges)
        if (!(row_move(in) && !row_move(out))) ts.forbidden.insert({in, out});
    return ts;
}

// Axis class of a directed move on the placement lattice. Hex kinds use the
// three lattice line families, grid kinds row/col/diagonal/anti-diagonal.
// Folded and wrapped links stay inside their line, so they classify too.
int axis_class(const Topology& t, int from, int to) {
    if (t.placement.is_hex()) {
        Axial a = t.placement.axial(from), b = t.placement.axial(to);
        int dq = b.q - a.q, dr = b.r - a.r;
        if (dr == 0) return 0;
        if (dq == 0) return 1;
        if (dq + dr == 0) return 2;
        return -1;
    }
    const ChipletSite& a = t.placement.site(from);
    const ChipletSite& b = t.placement.site(to);
    int dr = b.row - a.row, dc = b.col - a.col;
    if (dr == 0) return 0;
    if (dc == 0) return 1;
    if (dr == dc) return 2;
    if (dr == -dc) return 3;
    return -1;
}

long long line_key(const Topology& t, int axis, int node) {
    if (t.placement.is_hex()) {
        Axial a = t.placement.axial(node);
        switch (axis) {
            case 0: return a.r;
            case 1: return a.q;
            default: return a.q + a.r;
        }
    }
    const ChipletSite& s = t.placement.site(node);
    switch (axis) {
        case 0: return s.row;
        case 1: return s.col;
        case 2: return s.row - s.col;
        default: return s.row + s.col;
    }
}

// Routes may only switch to an equal or higher axis class. Every dependency
// cycle then lives inside one lattice line; lines that wrap into rings get
// one forbidden continuation turn per direction, staggered across parallel
// lines so no region collects all the re-routed wrap traffic.
TurnSet axis_order_turns(const Topology& t, const Cdg& g, bool datelines) {
    TurnSet ts;
    std::vector<int> cls(g.channels.size());
    for (size_t c = 0; c < g.channels.size(); ++c) {
        cls[c] = axis_class(t, g.channels[c].from, g.channels[c].to);
        if (cls[c] < 0) return ts; // unknown geometry; caller falls back
    }
    for (const auto& [in, out] : g.turn_edges)
        if (cls[out] < cls[in]) ts.forbidden.insert({in, out});
    if (!datelines) return ts;

    std::map<std::pair<int, long long>, std::map<int, std::vector<int>>> lines;
    for (const DirectedChannel& ch : g.channels) {
        if (ch.from >= ch.to) continue; // one entry per link
        int ax = axis_class(t, ch.from, ch.to);
        auto& adj = lines[{ax, line_key(t, ax, ch.from)}];
        adj[ch.from].push_back(ch.to);
        adj[ch.to].push_back(ch.from);
    }
    int ordinal = 0;
    for (auto& [key, adj] : lines) {
        ++ordinal;
        bool ring = true;
        for (const auto& [node, nbrs] : adj)
            if (nbrs.size() != 2) {
                ring = false;
                break;
            }
        if (!ring) continue; // open line: its channel chain is already acyclic
        int start = adj.begin()->first;
        std::vector<int> seq{start};
        int prev = -1, cur = start;
        do {
            const auto& nb = adj[cur];
            int nxt = nb[0] == prev ? nb[1]
                      : nb[1] == prev ? nb[0]
                                      : std::min(nb[0], nb[1]);
            prev = cur;
            cur = nxt;
            seq.push_back(cur);
        } while (cur != start && seq.size() <= adj.size());
        if (cur != start) continue; // not one ring; leave it to verification
        seq.pop_back();
        int m = static_cast<int>(seq.size());
        int p = ordinal % m;
        int x = seq[p], y = seq[(p + 1) % m], z = seq[(p + 2) % m];
        ts.forbidden.insert({g.channel(x, y), g.channel(y, z)});
        ts.forbidden.insert({g.channel(z, y), g.channel(y, x)});
    }
    return ts;
}

} // namespace

int Cdg::channel(int from, int to) const {
    auto it = channel_ids.find({from, to});
    return it == channel_ids.end() ? -1 : it->second;
}

Cdg build_cdg(const Topology& t) {
    Cdg g;
    g.n_sites = t.count();
    g.channels.reserve(t.links.size() * 2);
    for (const Link& l : t.links) {
        g.channels.push_back({l.a, l.b});
        g.channels.push_back({l.b, l.a});
    }
    std::sort(g.channels.begin(), g.channels.end(),
              [](const DirectedChannel& x, const DirectedChannel& y) {
                  return std::tie(x.from, x.to) < std::tie(y.from, y.to);
              });
    for (int c = 0; c < static_cast<int>(g.channels.size()); ++c)
        g.channel_ids[{g.channels[c].from, g.channels[c].to}] = c;
    for (int in = 0; in < static_cast<int>(g.channels.size()); ++in) {
        int router = g.channels[in].to;
        int back = g.channels[in].from;
        auto it = g.channel_ids.lower_bound({router, INT_MIN});
        for (; it != g.channel_ids.end() && it->first.first == router; ++it) {
            if (it->first.second == back) continue; // U-turn
            g.turn_edges.push_back({in, it->second});
        }
    }
    std::sort(g.turn_edges.begin(), g.turn_edges.end());
    return g;
}

TurnSet break_cycles_generic(const Cdg& g) {
    TurnGraph tg = TurnGraph::build(g);
    TurnSet ts;
    while (true) {
        SccResult scc = strongly_connected(tg, nullptr);
        std::vector<int> size(scc.n_comps, 0);
        for (int c : scc.comp)
            if (c >= 0) ++size[c];
        int u0 = -1;
        for (int u = 0; u < tg.n_channels; ++u)
            if (size[scc.comp[u]] > 1) {
                u0 = u;
                break;
            }
        if (u0 < 0) break;
        int target = scc.comp[u0];
        std::vector<char> in_comp(tg.n_channels, 0);
        for (int u = 0; u < tg.n_channels; ++u) in_comp[u] = scc.comp[u] == target;

        // shortest cycle through u0 inside its component (BFS, deterministic)
        std::vector<int> parent_edge(tg.n_channels, -1), parent(tg.n_channels, -1);
        std::vector<char> seen(tg.n_channels, 0);
        std::queue<int> q;
        q.push(u0);
        seen[u0] = 1;
        int closing_edge = -1, closing_from = -1;
        while (!q.empty() && closing_edge < 0) {
            int u = q.front();
            q.pop();
            for (int e = tg.offsets[u]; e < tg.offsets[u + 1]; ++e) {
                if (tg.forbidden[e]) continue;
                int v = tg.out_channel[e];
                if (!in_comp[v]) continue;
                if (v == u0) {
                    closing_edge = e;
                    closing_from = u;
                    break;
                }
                if (!seen[v]) {
                    seen[v] = 1;
                    parent[v] = u;
                    parent_edge[v] = e;
                    q.push(v);
                }
            }
        }
        if (closing_edge < 0)
            throw RoutingError("cycle breaking: component without a cycle through "
                               "its first channel");
        std::vector<int> cycle_edges{closing_edge};
        for (int u = closing_from; u != u0; u = parent[u])
            cycle_edges.push_back(parent_edge[u]);

        struct Cand {
            long long score;
            int in, out, edge;
            bool operator<(const Cand& o) const {
                return std::tie(score, in, out) < std::tie(o.score, o.in, o.out);
            }
        };
        auto score_edges = [&](const std::vector<int>& edges) {
            std::vector<Cand> cands;
            cands.reserve(edges.size());
            for (int e : edges) {
                tg.forbidden[e] = 1;
                SccResult sub = strongly_connected(tg, &in_comp);
                long long sc = intra_scc_edges(tg, sub);
                tg.forbidden[e] = 0;
                int in = -1;
                // recover the in-channel of edge e (CSR owner)
                int lo = 0, hi = tg.n_channels;
                while (lo + 1 < hi) {
                    int mid = (lo + hi) / 2;
                    (tg.offsets[mid] <= e ? lo : hi) = mid;
                }
                in = lo;
                cands.push_back({sc, in, tg.out_channel[e], e});
            }
            std::sort(cands.begin(), cands.end());
            return cands;
        };
        auto try_commit = [&](const std::vector<Cand>& cands) {
            for (const Cand& c : cands) {
                tg.forbidden[c.edge] = 1;
                if (all_pairs_reachable(g, tg)) {
                    ts.forbidden.insert({c.in, c.out});
                    return true;
                }
                tg.forbidden[c.edge] = 0;
            }
            return false;
        };
        if (try_commit(score_edges(cycle_edges))) continue;
        // widen to every allowed edge inside the component
        std::vector<int> all_edges;
        for (int u = 0; u < tg.n_channels; ++u) {
            if (!in_comp[u]) continue;
            for (int e = tg.offsets[u]; e < tg.offsets[u + 1]; ++e)
                if (!tg.forbidden[e] && in_comp[tg.out_channel[e]])
                    all_edges.push_back(e);
        }
        if (!try_commit(score_edges(all_edges)))
            throw RoutingError("cycle breaking cannot break a cycle without "
                               "disconnecting some site pair");
    }
    return ts;
}

// --- level routing: the guaranteed-consistent fallback ---------------------
// Channels are oriented "up" toward a central BFS root (ties toward smaller
// ids). Forbidding every down->up turn leaves the dependency graph acyclic
// (a cycle would need to regain a level or id it gave up), every pair stays
// reachable through an up-phase followed by a down-phase, and the tables
// built below are per-site consistent: a site with any pure-down path to the
// destination always forwards downward, so traffic that has started its
// descent never needs a forbidden turn.

namespace {

std::vector<std::vector<int>> site_adjacency(const Topology& t) {
    std::vector<std::vector<int>> adj(t.count());
    for (const Link& l : t.links) {
        adj[l.a].push_back(l.b);
        adj[l.b].push_back(l.a);
    }
    for (auto& v : adj) std::sort(v.begin(), v.end());
    return adj;
}

std::vector<int> bfs_levels(const std::vector<std::vector<int>>& adj, int root) {
    std::vector<int> level(adj.size(), -1);
    std::vector<int> queue{root};
    level[root] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        int u = queue[head];
        for (int v : adj[u])
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
    }
    return level;
}

int central_root(const std::vector<std::vector<int>>& adj) {
    int best = 0;
    int best_ecc = std::numeric_limits<int>::max();
    for (int s = 0; s < static_cast<int>(adj.size()); ++s) {
        std::vector<int> lv = bfs_levels(adj, s);
        int ecc = 0;
        for (int l : lv) ecc = std::max(ecc, l);
        if (ecc < best_ecc) {
            best_ecc = ecc;
            best = s;
        }
    }
    return best;
}

std::vector<char> upward_channel_flags(const Cdg& g, const std::vector<int>& level) {
    std::vector<char> up(g.channels.size(), 0);
    for (std::size_t c = 0; c < g.channels.size(); ++c) {
        const DirectedChannel& ch = g.channels[c];
        up[c] = level[ch.to] < level[ch.from] ||
                (level[ch.to] == level[ch.from] && ch.to < ch.from);
    }
    return up;
}

TurnSet level_turns(const Cdg& g, const std::vector<char>& up) {
    TurnSet ts;
    for (const auto& [in, out] : g.turn_edges)
        if (!up[in] && up[out]) ts.forbidden.insert({in, out});
    return ts;
}

RoutingTable level_tables(const Topology& t, const Cdg& g,
                          const std::vector<char>& up) {
    const int n = t.count();
    RoutingTable rt;
    rt.n_sites = n;
    rt.next.assign(static_cast<size_t>(n) * n, -1);

    // Per-site outgoing neighbors split by channel orientation, and the
    // reverse lists used when searching backward from the destination.
    std::vector<std::vector<int>> out_down(n), out_up(n), in_down(n), in_up(n);
    for (std::size_t c = 0; c < g.channels.size(); ++c) {
        const DirectedChannel& ch = g.channels[c];
        (up[c] ? out_up : out_down)[ch.from].push_back(ch.to);
        (up[c] ? in_up : in_down)[ch.to].push_back(ch.from);
    }

    const int inf = std::numeric_limits<int>::max() / 2;
    std::vector<int> down_dist(n), best(n);
    for (int d = 0; d < n; ++d) {
        // Pure-down distance to d.
        std::fill(down_dist.begin(), down_dist.end(), inf);
        down_dist[d] = 0;
        std::vector<int> queue{d};
        for (std::size_t head = 0; head < queue.size(); ++head) {
            int v = queue[head];
            for (int u : in_down[v])
                if (down_dist[u] == inf) {
                    down_dist[u] = down_dist[v] + 1;
                    queue.push_back(u);
                }
        }
        // Up-phase distance on top of the down cores.
        std::copy(down_dist.begin(), down_dist.end(), best.begin());
        using Item = std::pair<int, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
        for (int u = 0; u < n; ++u)
            if (best[u] < inf) pq.push({best[u], u});
        while (!pq.empty()) {
            auto [dist, v] = pq.top();
            pq.pop();
            if (dist > best[v]) continue;
            for (int u : in_up[v])
                if (dist + 1 < best[u]) {
                    best[u] = dist + 1;
                    pq.push({best[u], u});
                }
        }
        for (int u = 0; u < n; ++u) {
            if (u == d) continue;
            int pick = -1;
            if (down_dist[u] < inf) {
                for (int v : out_down[u])
                    if (down_dist[v] == down_dist[u] - 1) {
                        pick = v;
                        break;
                    }
            } else {
                if (best[u] >= inf)
                    throw RoutingError("level routing found no route from site " +
                                       std::to_string(u) + " to " + std::to_string(d));
                for (int v : out_up[u])
                    if (best[v] == best[u] - 1) {
                        pick = v;
                        break;
                    }
            }
            if (pick < 0)
                throw RoutingError("level routing lost its distance invariant at site " +
                                   std::to_string(u));
            rt.next[static_cast<size_t>(u) * n + d] = pick;
        }
    }
    return rt;
}

} // namespace

TurnSet break_cycles(const Topology& t, const Cdg& g) {
    TurnSet ts;
    bool fast = true;
    switch (t.kind) {
        case TopologyKind::mesh:
        case TopologyKind::octa_mesh:
            ts = west_first_turns(t, g);
            break;
        case TopologyKind::hypercube:
            ts = ascending_dimension_turns(g);
            break;
        case TopologyKind::flattened_butterfly:
            ts = row_then_column_turns(t, g);
            break;
        case TopologyKind::hexa_mesh:
            ts = axis_order_turns(t, g, false);
            break;
        case TopologyKind::torus:
        case TopologyKind::folded_torus:
        case TopologyKind::folded_hexa_torus:
        case TopologyKind::folded_octa_torus:
            ts = axis_order_turns(t, g, true);
            break;
        default:
            fast = false;
    }
    if (fast) {
        TurnGraph tg = TurnGraph::build(g);
        apply_turnset(tg, ts);
        if (is_acyclic(tg) && all_pairs_reachable(g, tg)) return ts;
        // defensive: a closed-form set that fails its contract is discarded
    }
    return break_cycles_generic(g);
}

std::vector<int> RoutingTable::route(int src, int dst) const {
    std::vector<int> r{src};
    int cur = src;
    while (cur != dst) {
        int nx = next_hop(cur, dst);
        if (nx < 0 || static_cast<int>(r.size()) > n_sites)
            throw RoutingError("routing table walks off: " + std::to_string(src) +
                               " -> " + std::to_string(dst));
        r.push_back(nx);
        cur = nx;
    }
    return r;
}

RoutingTable build_routing_tables(const Topology& t, const Cdg& g,
                                  const TurnSet& turns) {
    int n = t.count();
    RoutingTable rt;
    rt.n_sites = n;
    rt.next.assign(static_cast<size_t>(n) * n, -1);

    uint64_t nc = g.channels.size();
    std::vector<uint64_t> fb;
    fb.reserve(turns.forbidden.size());
    for (const auto& [in, out] : turns.forbidden)
        fb.push_back(static_cast<uint64_t>(in) * nc + out);
    auto allowed = [&](int in, int out) {
        return !std::binary_search(fb.begin(), fb.end(),
                                   static_cast<uint64_t>(in) * nc + out);
    };

    // adj[s]: (neighbor, channel s->neighbor, channel neighbor->s)
    std::vector<std::vector<std::tuple<int, int, int>>> adj(n);
    for (int c = 0; c < static_cast<int>(nc); ++c) {
        int from = g.channels[c].from, to = g.channels[c].to;
        adj[from].push_back({to, c, g.channel(to, from)});
    }
    for (auto& v : adj) std::sort(v.begin(), v.end());

    std::vector<char> settled(n);
    std::vector<int> fchan(n, -1); // channel (u -> next_hop(u)) once settled
    using Item = std::tuple<int, int, int>; // (dist, site, via)
    for (int d = 0; d < n; ++d) {
        std::fill(settled.begin(), settled.end(), 0);
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
        pq.push({0, d, -1});
        int n_settled = 0;
        while (!pq.empty()) {
            auto [dist, u, via] = pq.top();
            pq.pop();
            if (settled[u]) continue;
            settled[u] = 1;
            ++n_settled;
            if (u != d) {
                rt.next[static_cast<size_t>(u) * n + d] = via;
                fchan[u] = g.channel(u, via);
            }
            for (const auto& [w, c_uw, c_wu] : adj[u]) {
                if (settled[w]) continue;
                // route w -> u -> next_hop(u): the turn at u must be allowed
                if (u == d || allowed(c_wu, fchan[u])) pq.push({dist + 1, w, u});
            }
        }
        if (n_settled < n)
            throw RoutingError("no turn-legal route to destination " +
                               std::to_string(d) + " from " +
                               std::to_string(n - n_settled) + " sites");
    }
    return rt;
}

DeadlockReport verify_deadlock_free(const Topology& t, const Cdg& g,
                                    const TurnSet& turns, const RoutingTable& table) {
    DeadlockReport rep;
    int nc = static_cast<int>(g.channels.size());
    TurnGraph tg = TurnGraph::build(g);
    apply_turnset(tg, turns);

    // Kahn topological sort, smallest channel first, as the acyclicity witness
    std::vector<int> indeg(nc, 0);
    for (int u = 0; u < nc; ++u)
        for (int e = tg.offsets[u]; e < tg.offsets[u + 1]; ++e)
            if (!tg.forbidden[e]) ++indeg[tg.out_channel[e]];
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int c = 0; c < nc; ++c)
        if (indeg[c] == 0) ready.push(c);
    while (!ready.empty()) {
        int u = ready.top();
        ready.pop();
        rep.topo_order.push_back(u);
        for (int e = tg.offsets[u]; e < tg.offsets[u + 1]; ++e)
            if (!tg.forbidden[e] && --indeg[tg.out_channel[e]] == 0)
                ready.push(tg.out_channel[e]);
    }
    rep.acyclic = static_cast<int>(rep.topo_order.size()) == nc;
    if (!rep.acyclic && rep.detail.empty()) rep.detail = "cycle remains in CDG";

    int n = t.count();
    rep.pairs_total = n * (n - 1);
    rep.turns_legal = true;
    auto note = [&](const std::string& msg) {
        if (rep.detail.empty()) rep.detail = msg;
    };
    for (int s = 0; s < n; ++s) {
        for (int d = 0; d < n; ++d) {
            if (s == d) continue;
            int cur = s, prev_chan = -1, steps = 0;
            bool ok = true;
            while (cur != d) {
                int nx = table.next_hop(cur, d);
                if (nx < 0 || ++steps > n) {
                    ok = false;
                    note("pair (" + std::to_string(s) + "," + std::to_string(d) +
                         ") not routed");
                    break;
                }
                int chan = g.channel(cur, nx);
                if (chan < 0) {
                    ok = false;
                    note("route uses missing channel");
                    break;
                }
                if (prev_chan >= 0 && !turns.allows(prev_chan, chan)) {
                    rep.turns_legal = false;
                    note("forbidden turn (" + std::to_string(prev_chan) + "," +
                         std::to_string(chan) + ") on pair (" + std::to_string(s) +
                         "," + std::to_string(d) + ")");
                    ok = false;
                    break;
                }
                prev_chan = chan;
                cur = nx;
            }
            if (ok) ++rep.pairs_routed;
        }
    }
    rep.all_pairs_routed = rep.pairs_routed == rep.pairs_total;
    rep.pass = rep.acyclic && rep.all_pairs_routed && rep.turns_legal;
    return rep;
}

double routing_stretch(const Topology& t, const RoutingTable& table) {
    int n = t.count();
    if (n < 2) return 1.0;
    std::vector<std::vector<int>> adjn(n);
    for (const Link& l : t.links) {
        adjn[l.a].push_back(l.b);
        adjn[l.b].push_back(l.a);
    }
    long long bfs_sum = 0, routed_sum = 0;
    std::vector<int> dist(n);
    for (int s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::queue<int> q;
        q.push(s);
        dist[s] = 0;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adjn[u])
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push(v);
                }
        }
        for (int d = 0; d < n; ++d) {
            if (d == s) continue;
            if (dist[d] < 0) throw IntegrityError("disconnected topology");
            bfs_sum += dist[d];
            routed_sum += static_cast<long long>(table.route(s, d).size()) - 1;
        }
    }
    return static_cast<double>(routed_sum) / static_cast<double>(bfs_sum);
}

RoutingBundle build_routing(const Topology& t) {
    RoutingBundle b;
    b.cdg = build_cdg(t);
    b.turns = break_cycles(t, b.cdg);
    try {
        b.table = build_routing_tables(t, b.cdg, b.turns);
    } catch (const RoutingError&) {
        // A cycle-free turn set can keep every pair reachable yet admit no
        // consistent per-site next-hop assignment. Level routing is the
        // guaranteed fallback: worse load balance, but always constructible.
        std::vector<std::vector<int>> adj = site_adjacency(t);
        std::vector<int> level = bfs_levels(adj, central_root(adj));
        std::vector<char> up = upward_channel_flags(b.cdg, level);
        b.turns = level_turns(b.cdg, up);
        b.table = level_tables(t, b.cdg, up);
    }
    return b;
}

} // namespace ici
