#include "ici/serialize.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "ici/errors.hpp"

namespace ici {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

json parse(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw ParseError(std::string("invalid ") + what + " document: not parseable");
    return j;
}

const char* kind_name(ChipletKind k) {
    switch (k) {
        case ChipletKind::compute: return "compute";
        case ChipletKind::memory: return "memory";
        case ChipletKind::io: return "io";
    }
    return "?";
}

ChipletKind kind_from(const std::string& s) {
    if (s == "compute") return ChipletKind::compute;
    if (s == "memory") return ChipletKind::memory;
    if (s == "io") return ChipletKind::io;
    throw ParseError("unknown chiplet kind '" + s + "'");
}

ordered placement_doc(const Placement& p) {
    ordered doc;
    doc["arrangement"] = to_string(p.arrangement);
    if (p.arrangement == Arrangement::hex_spiral) {
        doc["k"] = p.rings;
    } else {
        doc["rows"] = p.rows;
        doc["cols"] = p.cols;
    }
    doc["spacing_mm"] = p.spacing_mm;
    doc["chiplet_area_mm2"] = p.chiplet_area_mm2;
    ordered sites = ordered::array();
    for (const ChipletSite& s : p.sites) {
        ordered site;
        site["id"] = s.id;
        site["row"] = s.row;
        site["col"] = s.col;
        site["kind"] = kind_name(s.kind);
        site["x_mm"] = s.x_mm;
        site["y_mm"] = s.y_mm;
        sites.push_back(std::move(site));
    }
    doc["sites"] = std::move(sites);
    return doc;
}

Placement placement_from_doc(const json& doc) {
    if (!doc.is_object() || !doc.contains("arrangement") || !doc.contains("sites"))
        throw ParseError("placement document needs arrangement and sites");
    Arrangement a = arrangement_from_string(doc.at("arrangement").get<std::string>());
    PlacementDims dims;
    if (a == Arrangement::hex_spiral)
        dims.rings = doc.at("k").get<int>();
    else {
        dims.rows = doc.at("rows").get<int>();
        dims.cols = doc.at("cols").get<int>();
    }
    Placement p = build_placement(a, dims, doc.at("chiplet_area_mm2").get<double>(),
                                  doc.at("spacing_mm").get<double>());
    const json& sites = doc.at("sites");
    if (!sites.is_array() || static_cast<int>(sites.size()) != p.count())
        throw ParseError("placement sites array does not match the dimensions");
    for (const json& s : sites) {
        int id = s.at("id").get<int>();
        if (id < 0 || id >= p.count()) throw ParseError("site id out of range");
        p.sites[id].kind = kind_from(s.at("kind").get<std::string>());
    }
    return p;
}

} // namespace

std::string placement_to_json(const Placement& p) {
    return placement_doc(p).dump(2) + "\n";
}

Placement placement_from_json(const std::string& text) {
    json doc = parse(text, "placement");
    try {
        return placement_from_doc(doc);
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid placement document: ") + e.what());
    }
}

std::string topology_to_json(const Topology& t) {
    ordered doc;
    doc["kind"] = to_string(t.kind);
    doc["phy_policy"] = to_string(t.phy_policy);
    doc["placement"] = placement_doc(t.placement);
    ordered links = ordered::array();
    for (const Link& l : t.links) {
        ordered link;
        link["a"] = l.a;
        link["b"] = l.b;
        link["length_mm"] = l.length_mm;
        link["range"] = l.range;
        links.push_back(std::move(link));
    }
    doc["links"] = std::move(links);
    return doc.dump(2) + "\n";
}

namespace {
Topology topology_from_doc(const json& doc);
} // namespace

Topology topology_from_json(const std::string& text) {
    json doc = parse(text, "topology");
    try {
        return topology_from_doc(doc);
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid topology document: ") + e.what());
    }
}

namespace {

Topology topology_from_doc(const json& doc) {
    if (!doc.is_object() || !doc.contains("kind") || !doc.contains("placement"))
        throw ParseError("topology document needs kind and placement");
    TopologyKind kind = topology_kind_from_string(doc.at("kind").get<std::string>());
    PhyPolicy policy = doc.contains("phy_policy")
                           ? phy_policy_from_string(doc.at("phy_policy").get<std::string>())
                           : PhyPolicy::edge;
    Placement p = placement_from_doc(doc.at("placement"));
    Topology t = generate_topology(kind, std::move(p), policy);
    if (doc.contains("links")) {
        const json& links = doc.at("links");
        if (!links.is_array() || links.size() != t.links.size())
            throw ParseError("topology links do not match the generator output");
        for (size_t i = 0; i < links.size(); ++i)
            if (links[i].at("a").get<int>() != t.links[i].a ||
                links[i].at("b").get<int>() != t.links[i].b)
                throw ParseError("topology links do not match the generator output");
    }
    return t;
}

} // namespace

std::string metrics_to_json(const GraphMetrics& m) {
    ordered doc;
    doc["diameter"] = m.diameter;
    doc["avg_hops"] = m.avg_hops;
    doc["radix"] = m.radix;
    doc["max_range"] = m.max_range;
    doc["max_length_mm"] = m.max_length_mm;
    return doc.dump(2) + "\n";
}

std::string routes_to_json(const RoutingTable& table) {
    ordered doc;
    ordered pairs = ordered::array();
    for (int s = 0; s < table.n_sites; ++s)
        for (int d = 0; d < table.n_sites; ++d) {
            if (s == d) continue;
            ordered entry;
            entry["src"] = s;
            entry["dst"] = d;
            entry["route"] = table.route(s, d);
            pairs.push_back(std::move(entry));
        }
    doc["pairs"] = std::move(pairs);
    return doc.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file '" + path + "'");
    out << text;
    if (!out) throw ValidationError("failed while writing '" + path + "'");
}

} // namespace ici
