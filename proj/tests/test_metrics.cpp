#include <doctest.h>

#include <cmath>
#include <random>

#include "octa/metrics.hpp"
#include "support/oracles.hpp"

using namespace octa;
using namespace octa::metrics;

TEST_CASE("identical non-empty masks score 1") {
    std::mt19937_64 rng(1);
    const BinaryMask m = oracle::random_mask(12, 12, 0.5, rng);
    const OverlapReport r = overlap(m, m);
    CHECK(r.jaccard_index == 1.0);
    CHECK(r.dice == 1.0);
    CHECK(r.jaccard_distance == 0.0);
    CHECK_FALSE(r.both_empty);
}

TEST_CASE("disjoint non-empty masks score 0") {
    BinaryMask a(6, 6, false), b(6, 6, false);
    a.set(0, 0, true);
    b.set(5, 5, true);
    const OverlapReport r = overlap(a, b);
    CHECK(r.jaccard_index == 0.0);
    CHECK(r.dice == 0.0);
    CHECK(r.jaccard_distance == 1.0);
}

TEST_CASE("80 of 100 overlap") {
    BinaryMask a(20, 10, false), b(20, 10, false);
    for (int i = 0; i < 100; ++i) a.pixels[static_cast<std::size_t>(i)] = 1;
    for (int i = 20; i < 120; ++i) b.pixels[static_cast<std::size_t>(i)] = 1;
    const OverlapReport r = overlap(a, b);
    CHECK(r.a_px == 100);
    CHECK(r.b_px == 100);
    CHECK(r.intersection_px == 80);
    CHECK(r.union_px == 120);
    CHECK(r.jaccard_index == doctest::Approx(80.0 / 120.0));
    CHECK(r.dice == doctest::Approx(0.8));
}

TEST_CASE("both-empty masks agree vacuously and are flagged") {
    const OverlapReport r = overlap(BinaryMask(4, 4, false), BinaryMask(4, 4, false));
    CHECK(r.both_empty);
    CHECK(r.jaccard_index == 1.0);
    CHECK(r.dice == 1.0);
}

TEST_CASE("dimension mismatch is an error") {
    CHECK_THROWS(overlap(BinaryMask(4, 4, false), BinaryMask(4, 5, false)));
}

TEST_CASE("overlap is symmetric and satisfies the dice-jaccard identity") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const BinaryMask a = oracle::random_mask(15, 11, 0.3, rng);
        const BinaryMask b = oracle::random_mask(15, 11, 0.5, rng);
        const OverlapReport ab = overlap(a, b);
        const OverlapReport ba = overlap(b, a);
        CHECK(ab.jaccard_index == ba.jaccard_index);
        CHECK(ab.dice == ba.dice);
        CHECK(ab.jaccard_distance == doctest::Approx(1.0 - ab.jaccard_index).epsilon(1e-15));
        const double expected_dice = 2.0 * ab.jaccard_index / (1.0 + ab.jaccard_index);
        CHECK(std::abs(ab.dice - expected_dice) < 1e-12);
        CHECK(ab.dice >= ab.jaccard_index);
    }
}
