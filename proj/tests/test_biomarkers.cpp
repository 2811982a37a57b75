#include <doctest.h>

#include <random>

#include "octa/biomarkers.hpp"
#include "octa/phantom.hpp"
#include "support/oracles.hpp"

using namespace octa;
using namespace octa::bio;

namespace {

// Mask with exactly n true pixels laid out row-major from the origin.
BinaryMask mask_with_count(int w, int h, std::size_t n) {
    BinaryMask m(w, h, false);
    for (std::size_t i = 0; i < n; ++i) m.pixels[i] = 1;
    return m;
}

}  // namespace

TEST_CASE("mcnv area reproduces the published pixel count") {
    const PixelGeometry geom = pixel_geometry(200.0, 510);
    const BinaryMask m = mask_with_count(510, 510, 112037);
    const double area = mcnv_area(m, geom);
    CHECK(area == doctest::Approx(112037.0 * geom.pixel_area_mm2));
    CHECK(area == doctest::Approx(0.01723).epsilon(1e-3));
}

TEST_CASE("mcnv area edge cases") {
    const PixelGeometry geom = pixel_geometry(200.0, 510);
    CHECK(mcnv_area(BinaryMask(510, 510, false), geom) == 0.0);
    CHECK(mcnv_area(BinaryMask(510, 510, true), geom) ==
          doctest::Approx(0.0400).epsilon(1e-2));
}

TEST_CASE("total area fills the donut hole") {
    const PixelGeometry geom = pixel_geometry(1000.0, 1000);
    // 5x5 block with a plus-shaped 5 px hole: 20 object px, 25 when filled.
    BinaryMask donut(9, 9, false);
    for (int y = 2; y < 7; ++y)
        for (int x = 2; x < 7; ++x) donut.set(x, y, true);
    donut.set(4, 3, false);
    donut.set(3, 4, false);
    donut.set(4, 4, false);
    donut.set(5, 4, false);
    donut.set(4, 5, false);
    REQUIRE(donut.count_true() == 20);
    CHECK(total_area(donut, geom) == doctest::Approx(25.0 * geom.pixel_area_mm2));
    CHECK(mcnv_area(donut, geom) == doctest::Approx(20.0 * geom.pixel_area_mm2));
}

TEST_CASE("total area equals mcnv area without holes") {
    const PixelGeometry geom = pixel_geometry(1000.0, 1000);
    const BinaryMask m = mask_with_count(8, 8, 24);
    CHECK(total_area(m, geom) == doctest::Approx(mcnv_area(m, geom)));
    CHECK(total_area(BinaryMask(8, 8, false), geom) == 0.0);
}

TEST_CASE("vessel density arithmetic") {
    CHECK(vessel_density(0.02, 0.04) == doctest::Approx(0.5));
    CHECK(vessel_density(0.03, 0.03) == doctest::Approx(1.0));
    CHECK(vessel_density(0.0, 0.0) == 0.0);
    CHECK_THROWS(vessel_density(0.04, 0.02));
    CHECK_THROWS(vessel_density(-0.01, 0.02));
}

TEST_CASE("record extraction on a sponge-like phantom") {
    phantom::PhantomSpec spec;
    spec.seed = 2024;
    spec.holes = 4;
    const phantom::Phantom ph = phantom::make_phantom(spec);

    seg::PipelineConfig cfg;
    const PixelGeometry geom = pixel_geometry(500.0, spec.width + 2 * spec.margin);
    const BiomarkerRecord rec = extract_record("sponge", ph.image, cfg, ph.crop, geom);
    CHECK_FALSE(rec.empty_mask);
    CHECK(rec.vessel_density < 1.0);
    CHECK(rec.vessel_density > 0.0);
    CHECK(rec.total_area_mm2 >= rec.mcnv_area_mm2);
    CHECK(rec.mcnv_area_mm2 == doctest::Approx(rec.object_pixels * geom.pixel_area_mm2));
}

TEST_CASE("record extraction on a hole-free disk phantom") {
    GrayImage img(64, 64, 10);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            if ((x - 32) * (x - 32) + (y - 32) * (y - 32) <= 15 * 15) img.at(x, y) = 210;

    seg::PipelineConfig cfg;
    const PixelGeometry geom = pixel_geometry(200.0, 64);
    const BiomarkerRecord rec = extract_record("disk", img, cfg, {0, 0, 64, 64}, geom);
    CHECK_FALSE(rec.empty_mask);
    CHECK(rec.vessel_density == doctest::Approx(1.0));
    CHECK(rec.filled_pixels == rec.object_pixels);
}

TEST_CASE("record extraction on an all-black image is zeroed and flagged") {
    const GrayImage img(32, 32, 0);
    seg::PipelineConfig cfg;
    const PixelGeometry geom = pixel_geometry(200.0, 32);
    const BiomarkerRecord rec = extract_record("black", img, cfg, {0, 0, 32, 32}, geom);
    CHECK(rec.empty_mask);
    CHECK(rec.object_pixels == 0);
    CHECK(rec.mcnv_area_mm2 == 0.0);
    CHECK(rec.total_area_mm2 == 0.0);
    CHECK(rec.vessel_density == 0.0);
}

TEST_CASE("area ordering holds over random masks") {
    std::mt19937_64 rng(404);
    const PixelGeometry geom = pixel_geometry(200.0, 510);
    for (int trial = 0; trial < 200; ++trial) {
        const BinaryMask m = oracle::random_mask(20, 16, 0.4, rng);
        const double a = mcnv_area(m, geom);
        const double t = total_area(m, geom);
        CHECK(t >= a);
        const double d = vessel_density(a, t);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
    }
}

TEST_CASE("area grows linearly with disjoint pixels") {
    const PixelGeometry geom = pixel_geometry(200.0, 510);
    BinaryMask m(30, 30, false);
    for (int y = 2; y < 6; ++y)
        for (int x = 2; x < 6; ++x) m.set(x, y, true);
    const double before = mcnv_area(m, geom);
    for (int y = 20; y < 23; ++y)
        for (int x = 20; x < 23; ++x) m.set(x, y, true);  // disjoint 9 px blob
    CHECK(mcnv_area(m, geom) == doctest::Approx(before + 9.0 * geom.pixel_area_mm2));
}
