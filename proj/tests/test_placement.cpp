#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ici/errors.hpp"
#include "ici/placement.hpp"

using namespace ici;

namespace {

Placement organic_grid(int rows, int cols) {
    return build_placement(Arrangement::grid, {rows, cols, 0}, 74.0, 0.15);
}

} // namespace

TEST_CASE("grid placement geometry matches the worked numbers") {
    Placement p = organic_grid(4, 4);
    CHECK(p.count() == 16);
    CHECK(p.side_mm == doctest::Approx(8.6023).epsilon(1e-4));
    CHECK(p.pitch_mm == doctest::Approx(8.7523).epsilon(1e-4));
    // row-major ids, centers on a uniform pitch
    const ChipletSite& s5 = p.site(5);
    CHECK(s5.row == 1);
    CHECK(s5.col == 1);
    CHECK(s5.x_mm == doctest::Approx(p.pitch_mm));
    CHECK(s5.y_mm == doctest::Approx(p.pitch_mm));
}

TEST_CASE("edge policy lengths: adjacent, skip-one, and full row span") {
    Placement p = organic_grid(4, 4);
    CHECK(link_length_mm(p, 0, 1, PhyPolicy::edge) == doctest::Approx(0.15));
    CHECK(link_length_mm(p, 0, 2, PhyPolicy::edge) == doctest::Approx(8.9023).epsilon(1e-4));
    CHECK(link_length_mm(p, 0, 1, PhyPolicy::center) == doctest::Approx(p.pitch_mm));

    Placement big = organic_grid(16, 16);
    CHECK(link_length_mm(big, 0, 15, PhyPolicy::edge) ==
          doctest::Approx(122.68).epsilon(1e-4));
    // edge never reports less than the physical gap
    CHECK(link_length_mm(big, 0, 1, PhyPolicy::edge) == doctest::Approx(0.15));
}

TEST_CASE("grid link range is chebyshev distance minus one") {
    Placement p = organic_grid(4, 4);
    CHECK(link_range(p, 0, 1) == 0);
    CHECK(link_range(p, 0, 2) == 1);
    CHECK(link_range(p, 0, 5) == 0);  // diagonal neighbor
    CHECK(link_range(p, 0, 10) == 1); // (0,0) -> (2,2)
    CHECK(link_range(p, 0, 15) == 2);
    CHECK_THROWS_AS((void)link_range(p, 3, 3), ValidationError);
}

TEST_CASE("hex_block shifts odd rows right by half a pitch") {
    Placement p = build_placement(Arrangement::hex_block, {4, 4, 0}, 74.0, 0.10);
    CHECK(p.site(4).x_mm == doctest::Approx(4.3512).epsilon(1e-4));
    CHECK(p.site(4).y_mm == doctest::Approx(p.pitch_mm));
    CHECK(p.site(0).x_mm == doctest::Approx(0.0));
    // even rows unshifted
    CHECK(p.site(8).x_mm == doctest::Approx(0.0));
}

TEST_CASE("hex_block six-neighborhood has unit hop distance") {
    Placement p = build_placement(Arrangement::hex_block, {4, 4, 0}, 74.0, 0.15);
    // (1,1) is interior: E, W, two up, two down
    int c = 1 * 4 + 1;
    std::vector<int> expect = {1 * 4 + 0, 1 * 4 + 2, 0 * 4 + 1, 0 * 4 + 2, 2 * 4 + 1, 2 * 4 + 2};
    for (int nb : expect) {
        CHECK(hex_hop_distance(p.axial(c), p.axial(nb)) == 1);
        CHECK(link_range(p, c, nb) == 0);
    }
}

TEST_CASE("hex_spiral site count and spiral ids") {
    for (int k = 1; k <= 8; ++k) {
        Placement p = build_placement(Arrangement::hex_spiral, {0, 0, k}, 74.0, 0.15);
        CHECK(p.count() == 3 * k * k + 3 * k + 1);
        // ids dense and unique
        std::set<int> ids;
        for (const ChipletSite& s : p.sites) ids.insert(s.id);
        CHECK(static_cast<int>(ids.size()) == p.count());
        CHECK(*ids.begin() == 0);
        CHECK(*ids.rbegin() == p.count() - 1);
        // center first, ring j fully at hop distance j
        CHECK(p.site(0).row == k);
        for (const ChipletSite& s : p.sites) {
            int ring = hex_hop_distance(p.axial(0), p.axial(s.id));
            if (s.id == 0) CHECK(ring == 0);
            int lo = ring == 0 ? 0 : 3 * (ring - 1) * (ring - 1) + 3 * (ring - 1) + 1;
            int hi = 3 * ring * ring + 3 * ring + 1;
            CHECK(s.id >= lo);
            CHECK(s.id < hi);
        }
    }
}

TEST_CASE("placement symmetry: each row mirrors onto itself") {
    for (Arrangement a : {Arrangement::grid, Arrangement::hex_block}) {
        Placement p = build_placement(a, {4, 6, 0}, 74.0, 0.15);
        std::map<int, std::pair<double, double>> extent; // row -> (xmin, xmax)
        for (const ChipletSite& s : p.sites) {
            auto [it, fresh] = extent.try_emplace(s.row, s.x_mm, s.x_mm);
            if (!fresh) {
                it->second.first = std::min(it->second.first, s.x_mm);
                it->second.second = std::max(it->second.second, s.x_mm);
            }
        }
        for (const ChipletSite& s : p.sites) {
            auto [lo, hi] = extent.at(s.row);
            double mirrored = lo + hi - s.x_mm;
            bool found = false;
            for (const ChipletSite& t : p.sites)
                if (t.row == s.row && std::abs(mirrored - t.x_mm) < 1e-9)
                    found = true;
            CHECK(found);
        }
    }
}

TEST_CASE("degenerate placements are rejected") {
    CHECK_THROWS_AS(build_placement(Arrangement::grid, {0, 4, 0}, 74.0, 0.15),
                    ValidationError);
    CHECK_THROWS_AS(build_placement(Arrangement::grid, {4, 4, 0}, 0.0, 0.15),
                    ValidationError);
    CHECK_THROWS_AS(build_placement(Arrangement::hex_spiral, {0, 0, 0}, 74.0, 0.15),
                    ValidationError);
    CHECK_THROWS_AS(build_placement(Arrangement::grid, {4, 4, 0}, 74.0, -0.1),
                    ValidationError);
}

TEST_CASE("mem_columns marks row ends as memory") {
    Placement p = assign_kinds(organic_grid(4, 4), KindScheme::mem_columns);
    int mem = 0;
    for (const ChipletSite& s : p.sites) {
        if (s.col == 0 || s.col == 3) {
            CHECK(s.kind == ChipletKind::memory);
            ++mem;
        } else {
            CHECK(s.kind == ChipletKind::compute);
        }
    }
    CHECK(mem == 8);
    CHECK_THROWS_AS(assign_kinds(organic_grid(4, 2), KindScheme::mem_columns),
                    ValidationError);
}

TEST_CASE("trace_cmi: io ring rows first, then memory columns") {
    Placement p = assign_kinds(organic_grid(4, 4), KindScheme::trace_cmi);
    int io = 0, mem = 0, comp = 0;
    for (const ChipletSite& s : p.sites) {
        if (s.row == 0 || s.row == 3) {
            CHECK(s.kind == ChipletKind::io); // corners are io, not memory
            ++io;
        } else if (s.col == 0 || s.col == 3) {
            CHECK(s.kind == ChipletKind::memory);
            ++mem;
        } else {
            ++comp;
        }
    }
    CHECK(io == 8);
    CHECK(mem == 4);
    CHECK(comp == 4);
    CHECK_THROWS_AS(assign_kinds(organic_grid(2, 4), KindScheme::trace_cmi),
                    ValidationError);
}

TEST_CASE("hex_spiral kind schemes use per-row extremes") {
    Placement p = assign_kinds(
        build_placement(Arrangement::hex_spiral, {0, 0, 3}, 74.0, 0.15),
        KindScheme::mem_columns);
    int mem = 0;
    for (const ChipletSite& s : p.sites)
        if (s.kind == ChipletKind::memory) ++mem;
    CHECK(mem == 2 * 7); // two per row, 7 rows at k=3
}
