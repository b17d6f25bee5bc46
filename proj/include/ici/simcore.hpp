#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ici/routing.hpp"
#include "ici/techmodel.hpp"
#include "ici/topology.hpp"
#include "ici/trace.hpp"
#include "ici/traffic.hpp"

namespace ici {

struct SimParams {
    int vcs = 4;
    int buf_flits_per_vc = 4;
    int router_latency_cycles = 3;
    int phy_latency_cycles = 2;
    long long warmup_cycles = 5000;
    long long measure_cycles = 20000;
    long long drain_cycle_cap = 100000; // extra cycles granted after measurement
    int packet_flits = 4;
    uint64_t seed = 1;
    double sat_accept_frac = 0.95;  // accepted/offered floor for "sustained"
    double sat_latency_mult = 10.0; // zero-load multiple treated as congested
    int sat_resolution = 256;       // saturation search grid: k / resolution
};

struct SimStats {
    double offered_rate = 0.0;  // flits/core/cycle generated in the window
    double accepted_rate = 0.0; // flits/core/cycle delivered out of the window
    double avg_latency_ns = 0.0;
    double p99_latency_ns = 0.0;
    long long delivered_packets = 0;
    double avg_hops = 0.0;
    // bits crossing each directed channel during the measurement window,
    // indexed like build_cdg(topology).channels
    std::vector<double> per_channel_bits;
    bool deadlock_flag = false;
};

// Cycle-based flit-level simulation: input-queued routers, virtual channels
// with credit flow control, wormhole switching, one router per chiplet with
// per-core injection/ejection ports.
SimStats simulate(const Topology& t, const RoutingTable& table,
                  const TechParams& tech, const RateTable& rates,
                  const TrafficSpec& traffic, const SimParams& sp,
                  double injection_rate);

// Analytic zero-load latency averaged over the pattern's (src, dst) pairs:
// (h+1)*L_r + h*2*L_p + sum of wire cycles + (flits-1), in nanoseconds.
double zero_load_avg_latency_ns(const Topology& t, const RoutingTable& table,
                                const TechParams& tech, const TrafficSpec& traffic,
                                int packet_flits, uint64_t seed);

// Latency of one isolated packet through an otherwise idle network.
double single_packet_latency_ns(const Topology& t, const RoutingTable& table,
                                const TechParams& tech, const RateTable& rates,
                                const SimParams& sp, int src, int dst, int flits);

struct SaturationResult {
    double rate = 0.0; // flits/core/cycle, on the k/resolution grid
    std::string note;
};

// Largest sustained injection rate by bisection; 0 when links are unusable
// (rate fraction zero at the maximum length) or nothing sustains.
SaturationResult find_saturation(const Topology& t, const RoutingTable& table,
                                 const TechParams& tech, const RateTable& rates,
                                 const TrafficSpec& traffic, const SimParams& sp);

// Replays trace records through the simulator; injection stops at cycle_cap.
SimStats replay_trace(const Topology& t, const RoutingTable& table,
                      const TechParams& tech, const RateTable& rates,
                      const Trace& trace, const SimParams& sp,
                      long long cycle_cap = 100000);

} // namespace ici
