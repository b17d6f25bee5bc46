#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ici/placement.hpp"

namespace ici {

struct TraceRecord {
    long long cycle = 0;
    int src = 0;
    int dst = 0;
    bool is_data = false; // false: control (single flit)
    long long bytes = 0;
};

struct Trace {
    std::vector<TraceRecord> records; // non-decreasing in cycle
};

// Text format, one record per line: "cycle,src_node,dst_node,type,bytes" with
// type in {data, control}; '#' starts a comment line.
Trace load_trace(const std::string& path);
Trace parse_trace(const std::string& text, const std::string& origin);
void save_trace(const Trace& trace, const std::string& path);

// Synthetic coherence-style workload for heterogeneous placements: compute
// sites issue control requests to memory/io sites, which answer with data
// packets (cache-line sized); some compute pairs exchange coherence control.
Trace generate_trace(const Placement& placement, uint64_t seed, long long cycles,
                     double requests_per_site_cycle = 0.02,
                     long long data_bytes = 64);

} // namespace ici
