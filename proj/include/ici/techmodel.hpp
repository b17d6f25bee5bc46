#pragma once

#include <string>
#include <vector>

namespace ici {

// Substrate technology and link-budget parameters. Defaults describe organic
// and glass packages; every field can be overridden through the sweep config.
struct TechParams {
    std::string substrate = "organic";
    double spacing_mm = 0.15;          // chiplet-to-chiplet gap
    double chiplet_area_mm2 = 74.0;
    double phy_area_mm2 = 0.88;        // per network port
    double chiplet_power_w = 25.0;
    double energy_pj_per_bit = 0.3;
    double phy_latency_ns = 2.0;       // per PHY crossing
    double router_latency_ns = 3.0;    // pipeline depth
    double bump_frac_power = 0.5;      // bumps reserved for power delivery
    double bump_frac_io = 0.2;         // bumps reserved for off-package io
    int cores_per_chiplet = 8;
    double bump_pitch_um = 50.0;
    int non_data_wires = 12;           // clock/control overhead per link
    double rel_permittivity = 3.1;
    double light_speed_km_per_s = 299792.0;
    double rmax_gbit_s = 32.0;         // per-wire signalling cap (configuration)
    double cycle_time_ns = 1.0;
};

TechParams organic_tech();
TechParams glass_tech();
TechParams tech_from_substrate(const std::string& substrate);

// Reach-dependent derating of the per-wire signalling rate. Piecewise-linear
// between anchors; 1.0 below the first anchor; 0.0 at or beyond cutoff_mm.
struct RateAnchor {
    double length_mm = 0.0;
    double fraction = 1.0;
};

struct RateTable {
    std::vector<RateAnchor> anchors; // ascending length, non-increasing fraction
    double cutoff_mm = 70.0;
};

RateTable default_rate_table(const std::string& substrate);
double rate_fraction(const RateTable& table, double length_mm);
void validate_rate_table(const RateTable& table);

// Data wires available per link after power/io bumps, signal sharing across
// the radix, and the non-data overhead. Throws if the radix leaves none.
int wires_per_link(const TechParams& tech, int radix);

// Peak bandwidth of one link of the given length, bits per second.
double link_bandwidth_bits_per_s(const TechParams& tech, const RateTable& table,
                                 int radix, double length_mm);

// Bits one link moves per cycle when every link is derated to the longest
// one; this is also the flit payload used by the simulator.
double flit_bits(const TechParams& tech, const RateTable& table, int radix,
                 double max_length_mm);

// Converts relative saturation throughput (flits/core/cycle) into absolute
// per-chiplet injection bandwidth, bits per second.
double absolute_throughput_bits_per_s(const TechParams& tech, const RateTable& table,
                                      double rel_throughput, int radix,
                                      double max_length_mm);

// Signal propagation delay over one link, in whole cycles (>= 1 when the
// link has any length).
int link_latency_cycles(const TechParams& tech, double length_mm);

double chiplet_area_mm2(const TechParams& tech, int radix);

// Steady-state power: per-chiplet baseline plus energy of the bits crossing
// every link PHY per second.
double system_power_w(const TechParams& tech, int n_chiplets,
                      const std::vector<double>& per_link_bits_per_s);

} // namespace ici
