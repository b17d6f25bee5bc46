#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "ici/errors.hpp"
#include "ici/placement.hpp"
#include "ici/rng.hpp"
#include "ici/traffic.hpp"

using namespace ici;

namespace {

Placement grid(int rows, int cols) {
    return build_placement(Arrangement::grid, {rows, cols, 0}, 74.0, 0.15);
}

} // namespace

TEST_CASE("pattern names round-trip") {
    for (const char* name :
         {"uniform", "permutation", "tornado", "neighbor", "hetero_mix", "trace"})
        CHECK(to_string(traffic_pattern_from_string(name)) == std::string(name));
    CHECK_THROWS_AS(traffic_pattern_from_string("bitrev"), ValidationError);
}

TEST_CASE("uniform destinations cover everyone except the source") {
    Placement p = grid(4, 4);
    TrafficGen gen(p, {TrafficPattern::uniform, 0.5}, 7);
    Rng rng(42);
    std::set<int> seen;
    for (int i = 0; i < 4000; ++i) {
        int d = gen.destination(5, rng);
        CHECK(d != 5);
        CHECK(d >= 0);
        CHECK(d < 16);
        seen.insert(d);
    }
    CHECK(seen.size() == 15);
    CHECK(gen.injecting_sites().size() == 16);
}

TEST_CASE("neighbor walks one step right along the row, wrapping") {
    Placement p = grid(2, 4);
    TrafficGen gen(p, {TrafficPattern::neighbor, 0.5}, 0);
    Rng rng(0);
    // row-major ids: row 0 is 0..3, row 1 is 4..7
    CHECK(gen.destination(0, rng) == 1);
    CHECK(gen.destination(1, rng) == 2);
    CHECK(gen.destination(3, rng) == 0);
    CHECK(gen.destination(4, rng) == 5);
    CHECK(gen.destination(7, rng) == 4);
}

TEST_CASE("tornado jumps half the row") {
    Placement p = grid(1, 6);
    TrafficGen gen(p, {TrafficPattern::tornado, 0.5}, 0);
    Rng rng(0);
    CHECK(gen.destination(0, rng) == 3);
    CHECK(gen.destination(2, rng) == 5);
    CHECK(gen.destination(4, rng) == 1);
}

TEST_CASE("tornado rejects a single-site row") {
    Placement p = grid(2, 1);
    TrafficGen gen(p, {TrafficPattern::tornado, 0.5}, 0);
    Rng rng(0);
    CHECK_THROWS_AS(gen.destination(0, rng), ValidationError);
}

TEST_CASE("permutation is a seeded derangement") {
    Placement p = grid(4, 4);
    TrafficGen gen(p, {TrafficPattern::permutation, 0.5}, 123);
    const std::vector<int>& perm = gen.permutation_map();
    REQUIRE(perm.size() == 16);
    std::set<int> image(perm.begin(), perm.end());
    CHECK(image.size() == 16); // bijection
    for (int i = 0; i < 16; ++i) CHECK(perm[i] != i);

    TrafficGen again(p, {TrafficPattern::permutation, 0.5}, 123);
    CHECK(again.permutation_map() == perm);
    TrafficGen other(p, {TrafficPattern::permutation, 0.5}, 124);
    CHECK(other.permutation_map() != perm);

    Rng rng(0);
    CHECK(gen.destination(3, rng) == perm[3]);
}

TEST_CASE("hetero_mix splits between memory and other compute sites") {
    Placement p = assign_kinds(grid(4, 4), KindScheme::mem_columns);

    std::set<int> memory, compute;
    for (const ChipletSite& s : p.sites) {
        if (s.kind == ChipletKind::memory) memory.insert(s.id);
        if (s.kind == ChipletKind::compute) compute.insert(s.id);
    }
    REQUIRE(memory.size() == 8);
    REQUIRE(compute.size() == 8);

    TrafficGen gen(p, {TrafficPattern::hetero_mix, 0.5}, 9);
    CHECK(gen.injecting_sites().size() == compute.size());
    for (int s : gen.injecting_sites()) CHECK(compute.count(s) == 1);

    int src = *compute.begin();
    Rng rng(5);
    int to_mem = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        int d = gen.destination(src, rng);
        CHECK(d != src);
        if (memory.count(d))
            ++to_mem;
        else
            CHECK(compute.count(d) == 1);
    }
    double frac = static_cast<double>(to_mem) / draws;
    CHECK(frac > 0.48);
    CHECK(frac < 0.52);
}

TEST_CASE("hetero_mix validates the placement and the mix") {
    Placement p = grid(4, 4); // all compute, no memory
    CHECK_THROWS_AS(TrafficGen(p, {TrafficPattern::hetero_mix, 0.5}, 0), ValidationError);

    Placement q = assign_kinds(grid(4, 4), KindScheme::mem_columns);
    CHECK_THROWS_AS(TrafficGen(q, {TrafficPattern::hetero_mix, 1.5}, 0), ValidationError);
}

TEST_CASE("trace pattern has no synthetic destinations") {
    Placement p = grid(2, 2);
    TrafficGen gen(p, {TrafficPattern::trace, 0.5}, 0);
    Rng rng(0);
    CHECK_THROWS_AS(gen.destination(0, rng), ValidationError);
}

TEST_CASE("destination streams are reproducible") {
    Placement p = grid(4, 4);
    TrafficGen gen(p, {TrafficPattern::uniform, 0.5}, 1);
    Rng a(99), b(99);
    for (int i = 0; i < 100; ++i) CHECK(gen.destination(i % 16, a) == gen.destination(i % 16, b));
}
