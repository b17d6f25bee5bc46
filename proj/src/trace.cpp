#include "ici/trace.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "ici/errors.hpp"
#include "ici/rng.hpp"

namespace ici {

namespace {

std::string_view trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

long long parse_int(std::string_view field, const std::string& origin, int line,
                    const char* what) {
    field = trim(field);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError(origin + ":" + std::to_string(line) + ": bad " + what +
                         " '" + std::string(field) + "'");
    return value;
}

} // namespace

Trace parse_trace(const std::string& text, const std::string& origin) {
    Trace trace;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    long long prev_cycle = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;

        std::vector<std::string_view> fields;
        size_t pos = 0;
        while (true) {
            size_t comma = line.find(',', pos);
            fields.push_back(line.substr(pos, comma - pos));
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (fields.size() != 5)
            throw ParseError(origin + ":" + std::to_string(line_no) +
                             ": expected 5 fields (cycle,src_node,dst_node,type,bytes), got " +
                             std::to_string(fields.size()));

        TraceRecord rec;
        rec.cycle = parse_int(fields[0], origin, line_no, "cycle");
        rec.src = static_cast<int>(parse_int(fields[1], origin, line_no, "src_node"));
        rec.dst = static_cast<int>(parse_int(fields[2], origin, line_no, "dst_node"));
        std::string_view type = trim(fields[3]);
        if (type == "data")
            rec.is_data = true;
        else if (type == "control")
            rec.is_data = false;
        else
            throw ParseError(origin + ":" + std::to_string(line_no) +
                             ": type must be 'data' or 'control', got '" +
                             std::string(type) + "'");
        rec.bytes = parse_int(fields[4], origin, line_no, "bytes");
        if (rec.cycle < 0)
            throw ParseError(origin + ":" + std::to_string(line_no) + ": negative cycle");
        if (rec.cycle < prev_cycle)
            throw ParseError(origin + ":" + std::to_string(line_no) +
                             ": cycles must be non-decreasing");
        if (rec.src < 0 || rec.dst < 0)
            throw ParseError(origin + ":" + std::to_string(line_no) + ": negative node id");
        if (rec.bytes < 0)
            throw ParseError(origin + ":" + std::to_string(line_no) + ": negative bytes");
        if (rec.is_data && rec.bytes == 0)
            throw ParseError(origin + ":" + std::to_string(line_no) +
                             ": data record needs bytes > 0");
        prev_cycle = rec.cycle;
        trace.records.push_back(rec);
    }
    return trace;
}

Trace load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open trace file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_trace(buf.str(), path);
}

void save_trace(const Trace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write trace file '" + path + "'");
    out << "# cycle,src_node,dst_node,type,bytes\n";
    for (const TraceRecord& r : trace.records)
        out << r.cycle << ',' << r.src << ',' << r.dst << ','
            << (r.is_data ? "data" : "control") << ',' << r.bytes << '\n';
    if (!out) throw ValidationError("failed while writing '" + path + "'");
}

Trace generate_trace(const Placement& placement, uint64_t seed, long long cycles,
                     double requests_per_site_cycle, long long data_bytes) {
    if (cycles <= 0) throw ValidationError("trace length must be positive");
    if (requests_per_site_cycle <= 0.0 || requests_per_site_cycle > 1.0)
        throw ValidationError("requests_per_site_cycle must lie in (0, 1]");
    if (data_bytes <= 0) throw ValidationError("data_bytes must be positive");

    std::vector<int> compute, served;
    for (const ChipletSite& s : placement.sites) {
        if (s.kind == ChipletKind::compute) compute.push_back(s.id);
        if (s.kind == ChipletKind::memory || s.kind == ChipletKind::io)
            served.push_back(s.id);
    }
    if (compute.empty())
        throw ValidationError("placement has no compute sites to issue requests");

    Rng rng(mix_seed(seed, 0x7472616365ull));
    Trace trace;
    for (long long cyc = 0; cyc < cycles; ++cyc) {
        for (int src : compute) {
            if (!rng.bernoulli(requests_per_site_cycle)) continue;
            // mostly memory/io requests answered with a data packet; the rest
            // is compute-to-compute coherence control
            bool to_served = !served.empty() && rng.real01() < 0.75;
            if (to_served) {
                int dst = served[rng.below(served.size())];
                trace.records.push_back({cyc, src, dst, false, 0});
                long long reply = cyc + 1 + static_cast<long long>(rng.below(8));
                trace.records.push_back({reply, dst, src, true, data_bytes});
            } else if (compute.size() > 1) {
                int dst = src;
                while (dst == src)
                    dst = compute[rng.below(compute.size())];
                trace.records.push_back({cyc, src, dst, false, 0});
            }
        }
    }
    std::stable_sort(trace.records.begin(), trace.records.end(),
                     [](const TraceRecord& a, const TraceRecord& b) {
                         return a.cycle < b.cycle;
                     });
    return trace;
}

} // namespace ici
