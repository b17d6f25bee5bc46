#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ici/topology.hpp"

namespace ici {

// One direction of an undirected link.
struct DirectedChannel {
    int from = -1;
    int to = -1;
};

// Channel dependency graph: nodes are directed channels, edges are the turns
// (in-channel -> out-channel sharing a router), U-turns excluded.
struct Cdg {
    int n_sites = 0;
    std::vector<DirectedChannel> channels;       // sorted by (from, to)
    std::vector<std::pair<int, int>> turn_edges; // sorted (in_id, out_id)
    std::map<std::pair<int, int>, int> channel_ids; // (from,to) -> channel id

    int channel(int from, int to) const;
};

Cdg build_cdg(const Topology& t);

// Forbidden turns; removing them from the CDG leaves it acyclic while every
// ordered site pair stays reachable through allowed turns.
struct TurnSet {
    std::set<std::pair<int, int>> forbidden; // (in_channel, out_channel)

    bool allows(int in_channel, int out_channel) const {
        return forbidden.find({in_channel, out_channel}) == forbidden.end();
    }
};

// Kind-aware entry point: closed-form turn prohibitions where a classic turn
// model applies (west-first on mesh/octa_mesh, ascending dimensions on the
// hypercube, row-then-column on the flattened butterfly), generic iterative
// cycle breaking everywhere else. The result is always verified.
TurnSet break_cycles(const Topology& t, const Cdg& cdg);

// Generic breaker: repeatedly find a cycle, forbid the turn on it that cuts
// the most remaining cycle structure while preserving all-pairs reachability,
// ties broken by lexicographic channel ids.
TurnSet break_cycles_generic(const Cdg& cdg);

// Site-keyed next-hop function per destination. Routes follow fixed
// continuations, so every consecutive channel pair stays an allowed turn.
struct RoutingTable {
    int n_sites = 0;
    std::vector<int> next; // next[s * n_sites + d] = next site, -1 at s == d

    int next_hop(int site, int dest) const { return next[site * n_sites + dest]; }
    std::vector<int> route(int src, int dst) const;
};

RoutingTable build_routing_tables(const Topology& t, const Cdg& cdg,
                                  const TurnSet& turns);

struct DeadlockReport {
    bool acyclic = false;
    bool all_pairs_routed = false;
    bool turns_legal = false;
    int pairs_routed = 0;
    int pairs_total = 0;
    std::vector<int> topo_order; // acyclicity witness over allowed channels
    std::string detail;          // first offending pair/turn when failing
    bool pass = false;
};

DeadlockReport verify_deadlock_free(const Topology& t, const Cdg& cdg,
                                    const TurnSet& turns, const RoutingTable& table);

// Average routed hops over average BFS hops (ordered pairs); 1.0 = shortest.
double routing_stretch(const Topology& t, const RoutingTable& table);

// Convenience bundle: build_cdg -> break_cycles -> build_routing_tables.
struct RoutingBundle {
    Cdg cdg;
    TurnSet turns;
    RoutingTable table;
};

RoutingBundle build_routing(const Topology& t);

} // namespace ici
