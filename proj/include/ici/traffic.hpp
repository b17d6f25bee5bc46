#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ici/placement.hpp"
#include "ici/rng.hpp"

namespace ici {

enum class TrafficPattern { uniform, permutation, tornado, neighbor, hetero_mix, trace };

const char* to_string(TrafficPattern p);
TrafficPattern traffic_pattern_from_string(const std::string& s);

struct TrafficSpec {
    TrafficPattern pattern = TrafficPattern::uniform;
    double mix_core_to_mem = 0.5; // hetero_mix: probability of a memory target
};

// Destination sampler bound to one placement. The permutation pattern fixes a
// seeded derangement at construction; all other draws stream from the caller's
// rng so a given rng state always yields the same destination.
class TrafficGen {
  public:
    TrafficGen(const Placement& placement, const TrafficSpec& spec, uint64_t seed);

    int destination(int src_site, Rng& rng) const;

    // Sites that generate packets (compute sites only under hetero_mix).
    const std::vector<int>& injecting_sites() const { return injectors_; }
    const std::vector<int>& permutation_map() const { return perm_; }

  private:
    TrafficSpec spec_;
    int n_ = 0;
    std::vector<int> perm_;
    std::vector<std::vector<int>> row_sites_;        // row -> sites in col order
    std::vector<std::pair<int, int>> row_pos_;       // site -> (row, index in row)
    std::vector<int> memory_sites_;
    std::vector<int> compute_sites_;
    std::vector<int> compute_rank_;                  // site -> rank among compute
    std::vector<int> injectors_;
};

// One-shot form; the permutation pattern derives its derangement from seed 0.
int gen_destination(TrafficPattern pattern, int src_site, const Placement& placement,
                    Rng& rng);

} // namespace ici
