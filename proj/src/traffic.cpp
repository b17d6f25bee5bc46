#include "ici/traffic.hpp"

#include <algorithm>

#include "ici/errors.hpp"

namespace ici {

const char* to_string(TrafficPattern p) {
    switch (p) {
        case TrafficPattern::uniform: return "uniform";
        case TrafficPattern::permutation: return "permutation";
        case TrafficPattern::tornado: return "tornado";
        case TrafficPattern::neighbor: return "neighbor";
        case TrafficPattern::hetero_mix: return "hetero_mix";
        case TrafficPattern::trace: return "trace";
    }
    return "?";
}

TrafficPattern traffic_pattern_from_string(const std::string& s) {
    for (TrafficPattern p : {TrafficPattern::uniform, TrafficPattern::permutation,
                             TrafficPattern::tornado, TrafficPattern::neighbor,
                             TrafficPattern::hetero_mix, TrafficPattern::trace})
        if (s == to_string(p)) return p;
    throw ValidationError("unknown traffic pattern '" + s + "'");
}

TrafficGen::TrafficGen(const Placement& placement, const TrafficSpec& spec,
                       uint64_t seed)
    : spec_(spec), n_(placement.count()) {
    if (n_ < 2) throw ValidationError("traffic needs at least two sites");

    int max_row = 0;
    for (const ChipletSite& s : placement.sites) max_row = std::max(max_row, s.row);
    row_sites_.assign(max_row + 1, {});
    for (const ChipletSite& s : placement.sites) row_sites_[s.row].push_back(s.id);
    for (auto& row : row_sites_)
        std::sort(row.begin(), row.end(), [&](int a, int b) {
            return placement.site(a).col < placement.site(b).col;
        });
    row_pos_.assign(n_, {-1, -1});
    for (int r = 0; r <= max_row; ++r)
        for (int i = 0; i < static_cast<int>(row_sites_[r].size()); ++i)
            row_pos_[row_sites_[r][i]] = {r, i};

    compute_rank_.assign(n_, -1);
    for (const ChipletSite& s : placement.sites) {
        if (s.kind == ChipletKind::memory) memory_sites_.push_back(s.id);
        if (s.kind == ChipletKind::compute) {
            compute_rank_[s.id] = static_cast<int>(compute_sites_.size());
            compute_sites_.push_back(s.id);
        }
    }

    if (spec.pattern == TrafficPattern::hetero_mix) {
        if (memory_sites_.empty())
            throw ValidationError("hetero_mix requires memory chiplets in the placement");
        if (compute_sites_.size() < 2)
            throw ValidationError("hetero_mix requires at least two compute chiplets");
        if (spec.mix_core_to_mem < 0.0 || spec.mix_core_to_mem > 1.0)
            throw ValidationError("mix_core_to_mem must lie in [0, 1]");
        injectors_ = compute_sites_;
    } else {
        injectors_.resize(n_);
        for (int i = 0; i < n_; ++i) injectors_[i] = i;
    }

    if (spec.pattern == TrafficPattern::permutation) {
        perm_.resize(n_);
        Rng rng(mix_seed(seed, 0x7261666669636bull)); // stream tag
        while (true) {
            for (int i = 0; i < n_; ++i) perm_[i] = i;
            for (int i = n_ - 1; i > 0; --i)
                std::swap(perm_[i], perm_[rng.below(static_cast<uint64_t>(i) + 1)]);
            bool derangement = true;
            for (int i = 0; i < n_; ++i)
                if (perm_[i] == i) {
                    derangement = false;
                    break;
                }
            if (derangement) break;
        }
    }
}

int TrafficGen::destination(int src_site, Rng& rng) const {
    switch (spec_.pattern) {
        case TrafficPattern::uniform: {
            int d = static_cast<int>(rng.below(static_cast<uint64_t>(n_) - 1));
            return d >= src_site ? d + 1 : d;
        }
        case TrafficPattern::permutation:
            return perm_[src_site];
        case TrafficPattern::tornado: {
            auto [row, idx] = row_pos_[src_site];
            int len = static_cast<int>(row_sites_[row].size());
            int dst = row_sites_[row][(idx + len / 2) % len];
            if (dst == src_site)
                throw ValidationError("tornado has no eligible destination on a row of " +
                                      std::to_string(len));
            return dst;
        }
        case TrafficPattern::neighbor: {
            auto [row, idx] = row_pos_[src_site];
            int len = static_cast<int>(row_sites_[row].size());
            int dst = row_sites_[row][(idx + 1) % len];
            if (dst == src_site)
                throw ValidationError("neighbor has no eligible destination on a row of " +
                                      std::to_string(len));
            return dst;
        }
        case TrafficPattern::hetero_mix: {
            if (compute_rank_[src_site] < 0)
                throw ValidationError("hetero_mix source must be a compute chiplet");
            if (rng.bernoulli(spec_.mix_core_to_mem))
                return memory_sites_[rng.below(memory_sites_.size())];
            int d = static_cast<int>(rng.below(compute_sites_.size() - 1));
            return compute_sites_[d >= compute_rank_[src_site] ? d + 1 : d];
        }
        case TrafficPattern::trace:
            break;
    }
    throw ValidationError("trace traffic has no synthetic destinations");
}

int gen_destination(TrafficPattern pattern, int src_site, const Placement& placement,
                    Rng& rng) {
    TrafficGen gen(placement, TrafficSpec{pattern, 0.5}, 0);
    return gen.destination(src_site, rng);
}

} // namespace ici
