#pragma once

#include <string>

#include "ici/placement.hpp"
#include "ici/routing.hpp"
#include "ici/topology.hpp"

namespace ici {

// JSON documents with fixed field names; floating point carries at least six
// significant digits. Loaders reject structurally invalid documents.
std::string placement_to_json(const Placement& p);
Placement placement_from_json(const std::string& text);

std::string topology_to_json(const Topology& t);
Topology topology_from_json(const std::string& text);

std::string metrics_to_json(const GraphMetrics& m);

// Routed paths for every ordered pair, as {pairs: [{src, dst, route}]}.
std::string routes_to_json(const RoutingTable& table);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace ici
