#include "ici/techmodel.hpp"

#include <cmath>

#include "ici/errors.hpp"

namespace ici {

TechParams organic_tech() {
    return TechParams{};
}

TechParams glass_tech() {
    TechParams t;
    t.substrate = "glass";
    t.spacing_mm = 0.10;
    t.bump_pitch_um = 35.0;
    t.rel_permittivity = 3.3;
    return t;
}

TechParams tech_from_substrate(const std::string& substrate) {
    if (substrate == "organic") return organic_tech();
    if (substrate == "glass") return glass_tech();
    throw ValidationError("unknown substrate '" + substrate +
                          "' (known: organic, glass)");
}

RateTable default_rate_table(const std::string& substrate) {
    // Anchors: straight and diagonal reach of range-1 links, diagonal reach
    // of range-2 links, and the usable-length limit.
    RateTable t;
    if (substrate == "organic") {
        t.anchors = {{8.9, 0.97}, {16.2, 0.89}, {28.6, 0.47}, {70.0, 0.05}};
    } else if (substrate == "glass") {
        t.anchors = {{8.8, 1.00}, {16.1, 0.99}, {28.4, 0.66}, {70.0, 0.05}};
    } else {
        throw ValidationError("unknown substrate '" + substrate +
                              "' (known: organic, glass)");
    }
    t.cutoff_mm = 70.0;
    return t;
}

void validate_rate_table(const RateTable& table) {
    if (table.cutoff_mm <= 0.0)
        throw ValidationError("rate table cutoff must be positive");
    double prev_len = 0.0;
    double prev_frac = 1.0;
    for (const RateAnchor& a : table.anchors) {
        if (a.length_mm <= prev_len && &a != &table.anchors.front())
            throw ValidationError("rate table anchors must be strictly ascending in length");
        if (a.fraction > prev_frac + 1e-12)
            throw ValidationError("rate table fractions must be non-increasing");
        if (a.fraction < 0.0 || a.fraction > 1.0)
            throw ValidationError("rate table fractions must lie in [0, 1]");
        prev_len = a.length_mm;
        prev_frac = a.fraction;
    }
}

double rate_fraction(const RateTable& table, double length_mm) {
    if (length_mm < 0.0)
        throw ValidationError("link length must be non-negative");
    if (length_mm >= table.cutoff_mm) return 0.0;
    if (table.anchors.empty() || length_mm <= table.anchors.front().length_mm)
        return table.anchors.empty() ? 1.0 : (length_mm < table.anchors.front().length_mm
                                                  ? 1.0
                                                  : table.anchors.front().fraction);
    for (size_t i = 1; i < table.anchors.size(); ++i) {
        const RateAnchor& lo = table.anchors[i - 1];
        const RateAnchor& hi = table.anchors[i];
        if (length_mm <= hi.length_mm) {
            double t = (length_mm - lo.length_mm) / (hi.length_mm - lo.length_mm);
            return lo.fraction + t * (hi.fraction - lo.fraction);
        }
    }
    return table.anchors.back().fraction;
}

namespace {

// Floor robust to the last-ulp error of clean decimal inputs (0.05, 0.3, ...).
long long floor_eps(double x) {
    return static_cast<long long>(std::floor(x + 1e-6));
}

} // namespace

int wires_per_link(const TechParams& tech, int radix) {
    if (radix <= 0) throw ValidationError("radix must be positive");
    double pitch_um2 = tech.bump_pitch_um * tech.bump_pitch_um;
    long long bumps_total = floor_eps(tech.chiplet_area_mm2 * 1e6 / pitch_um2);
    double signal_frac = 1.0 - tech.bump_frac_power - tech.bump_frac_io;
    long long signal_bumps = floor_eps(signal_frac * static_cast<double>(bumps_total));
    long long per_link = signal_bumps / radix;
    long long wires = per_link - tech.non_data_wires;
    if (wires <= 0)
        throw ValidationError("radix " + std::to_string(radix) +
                              " leaves no data wires (" + std::to_string(per_link) +
                              " signal bumps per link, " +
                              std::to_string(tech.non_data_wires) + " reserved)");
    return static_cast<int>(wires);
}

double link_bandwidth_bits_per_s(const TechParams& tech, const RateTable& table,
                                 int radix, double length_mm) {
    double frac = rate_fraction(table, length_mm);
    return static_cast<double>(wires_per_link(tech, radix)) * frac * tech.rmax_gbit_s * 1e9;
}

double flit_bits(const TechParams& tech, const RateTable& table, int radix,
                 double max_length_mm) {
    double frac = rate_fraction(table, max_length_mm);
    return static_cast<double>(wires_per_link(tech, radix)) * frac *
           tech.rmax_gbit_s * 1e9 * tech.cycle_time_ns * 1e-9;
}

double absolute_throughput_bits_per_s(const TechParams& tech, const RateTable& table,
                                      double rel_throughput, int radix,
                                      double max_length_mm) {
    if (rel_throughput < 0.0)
        throw ValidationError("relative throughput must be non-negative");
    double frac = rate_fraction(table, max_length_mm);
    return rel_throughput * tech.cores_per_chiplet *
           static_cast<double>(wires_per_link(tech, radix)) * frac * tech.rmax_gbit_s * 1e9;
}

int link_latency_cycles(const TechParams& tech, double length_mm) {
    if (length_mm < 0.0) throw ValidationError("link length must be non-negative");
    if (length_mm == 0.0) return 0;
    double seconds = (length_mm * 1e-3) * std::sqrt(tech.rel_permittivity) /
                     (tech.light_speed_km_per_s * 1e3);
    double cycles = seconds / (tech.cycle_time_ns * 1e-9);
    return std::max(1, static_cast<int>(std::ceil(cycles - 1e-12)));
}

double chiplet_area_mm2(const TechParams& tech, int radix) {
    if (radix < 0) throw ValidationError("radix must be non-negative");
    return tech.chiplet_area_mm2 + radix * tech.phy_area_mm2;
}

double system_power_w(const TechParams& tech, int n_chiplets,
                      const std::vector<double>& per_link_bits_per_s) {
    if (n_chiplets < 0) throw ValidationError("chiplet count must be non-negative");
    double p = n_chiplets * tech.chiplet_power_w;
    for (double bps : per_link_bits_per_s) p += bps * tech.energy_pj_per_bit * 1e-12;
    return p;
}

} // namespace ici
