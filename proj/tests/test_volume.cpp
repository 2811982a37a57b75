#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "octa/volume.hpp"
#include "support/oracles.hpp"

using namespace octa;
using namespace octa::vol;

namespace {

std::filesystem::path temp_file(const char* name) {
    const auto dir = std::filesystem::temp_directory_path() / "octa_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

SectionStack single_voxel_stack() {
    SectionStack stack;
    BinaryMask m(3, 3, false, 3.0);
    m.set(1, 1, true);
    stack.sections.push_back(m);
    stack.slice_distance_um = 25.0;
    return stack;
}

SectionStack random_stack(int w, int h, int depth, double density, std::mt19937_64& rng) {
    SectionStack stack;
    stack.slice_distance_um = 5.0 + static_cast<double>(rng() % 40);
    for (int k = 0; k < depth; ++k) stack.sections.push_back(oracle::random_mask(w, h, density, rng));
    return stack;
}

std::size_t size_of(const std::filesystem::path& p) {
    return static_cast<std::size_t>(std::filesystem::file_size(p));
}

}  // namespace

TEST_CASE("stack volume of a unit voxel") {
    const PixelGeometry geom = pixel_geometry(3.0, 3);  // 1 um pitch
    CHECK(stack_volume_um3(single_voxel_stack(), geom) == doctest::Approx(25.0));
}

TEST_CASE("stack volume reproduces the published pixel count at scan geometry") {
    const PixelGeometry geom = pixel_geometry(200.0, 510);
    SectionStack stack;
    stack.slice_distance_um = 25.0;
    std::size_t remaining = 112037;
    while (remaining > 0) {
        BinaryMask m(510, 510, false);
        const std::size_t take = std::min<std::size_t>(remaining, m.pixel_count());
        for (std::size_t i = 0; i < take; ++i) m.pixels[i] = 1;
        stack.sections.push_back(m);
        remaining -= take;
    }
    CHECK(stack_volume_um3(stack, geom) == doctest::Approx(4.308e5).epsilon(1e-3));
}

TEST_CASE("stack volume of empty sections is zero") {
    SectionStack stack;
    stack.sections.assign(3, BinaryMask(4, 4, false));
    CHECK(stack_volume_um3(stack, pixel_geometry(4.0, 4)) == 0.0);
}

TEST_CASE("stack validation rejects mismatched sections") {
    SectionStack stack;
    stack.sections.push_back(BinaryMask(4, 4, false));
    stack.sections.push_back(BinaryMask(4, 5, false));
    CHECK_THROWS(stack.validate());
    SectionStack empty;
    CHECK_THROWS(empty.validate());
}

TEST_CASE("volume decreases when a voxel is removed") {
    std::mt19937_64 rng(8);
    const PixelGeometry geom = pixel_geometry(10.0, 10);
    SectionStack stack = random_stack(10, 10, 3, 0.5, rng);
    const double before = stack_volume_um3(stack, geom);
    bool removed = false;
    for (auto& section : stack.sections)
        for (auto& p : section.pixels)
            if (p && !removed) {
                p = 0;
                removed = true;
            }
    REQUIRE(removed);
    CHECK(stack_volume_um3(stack, geom) < before);
}

TEST_CASE("paper follow-up direction: fewer pixels means smaller volume") {
    const PixelGeometry geom = pixel_geometry(200.0, 510);
    auto volume_for = [&](std::size_t pixels) {
        SectionStack stack;
        stack.slice_distance_um = 25.0;
        BinaryMask m(510, 510, false);
        for (std::size_t i = 0; i < pixels; ++i) m.pixels[i] = 1;
        stack.sections.push_back(m);
        return stack_volume_um3(stack, geom);
    };
    CHECK(volume_for(93112) < volume_for(112037));
}

TEST_CASE("single voxel surface is a 12-triangle cube of matching volume") {
    const PixelGeometry geom = pixel_geometry(3.0, 3);
    const SectionStack stack = single_voxel_stack();
    const TriangleMesh mesh = voxel_surface(stack, geom);
    CHECK(mesh.triangles.size() == 12);
    CHECK(is_watertight(mesh));
    CHECK(mesh_volume_um3(mesh) == doctest::Approx(stack_volume_um3(stack, geom)));
}

TEST_CASE("two-voxel bar suppresses the shared face") {
    const PixelGeometry geom = pixel_geometry(4.0, 4);  // 1 um pitch
    SectionStack stack;
    BinaryMask m(4, 4, false, 4.0);
    m.set(1, 1, true);
    m.set(2, 1, true);
    stack.sections.push_back(m);
    stack.slice_distance_um = 25.0;

    const TriangleMesh mesh = voxel_surface(stack, geom);
    CHECK(mesh.triangles.size() == 20);
    CHECK(is_watertight(mesh));
    CHECK(mesh_volume_um3(mesh) == doctest::Approx(50.0));
}

TEST_CASE("extruded donut stays watertight with genus 1") {
    SectionStack stack;
    stack.slice_distance_um = 10.0;
    BinaryMask ring(7, 7, false, 7.0);
    for (int y = 1; y <= 4; ++y)
        for (int x = 1; x <= 4; ++x) ring.set(x, y, true);
    ring.set(2, 2, false);
    ring.set(3, 2, false);
    ring.set(2, 3, false);
    ring.set(3, 3, false);
    stack.sections.assign(3, ring);

    const PixelGeometry geom = pixel_geometry(7.0, 7);
    const TriangleMesh mesh = voxel_surface(stack, geom);
    CHECK(is_watertight(mesh));
    CHECK(mesh_volume_um3(mesh) ==
          doctest::Approx(stack_volume_um3(stack, geom)).epsilon(1e-9));
    // Genus 1: V - E + F = 0 for a torus.
    const long faces = static_cast<long>(mesh.triangles.size());
    const long edges = faces * 3 / 2;
    const long vertices = static_cast<long>(mesh.vertices.size());
    CHECK(vertices - edges + faces == 0);
}

TEST_CASE("mesh volume equals stack volume on random stacks") {
    std::mt19937_64 rng(2718);
    for (int trial = 0; trial < 25; ++trial) {
        const SectionStack stack = random_stack(12, 9, 4, 0.4, rng);
        const PixelGeometry geom = pixel_geometry(200.0, 510);
        if (stack_volume_um3(stack, geom) == 0.0) continue;
        const TriangleMesh mesh = voxel_surface(stack, geom);
        REQUIRE(is_watertight(mesh));
        const double mv = mesh_volume_um3(mesh);
        const double sv = stack_volume_um3(stack, geom);
        CHECK(std::abs(mv - sv) / sv < 1e-6);
    }
}

TEST_CASE("mesh volume rejects open meshes") {
    TriangleMesh open;
    open.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    open.triangles.push_back({0, 1, 2});
    CHECK_FALSE(is_watertight(open));
    CHECK_THROWS(mesh_volume_um3(open));
    CHECK_FALSE(is_watertight(TriangleMesh{}));
}

TEST_CASE("diagonally touching voxels still mesh watertight") {
    // Two voxels sharing only a grid edge: the classic non-manifold pinch.
    SectionStack stack;
    BinaryMask m(4, 4, false, 4.0);
    m.set(1, 1, true);
    m.set(2, 2, true);
    stack.sections.push_back(m);
    stack.slice_distance_um = 2.0;

    const PixelGeometry geom = pixel_geometry(4.0, 4);
    const TriangleMesh mesh = voxel_surface(stack, geom);
    CHECK(mesh.triangles.size() == 24);
    CHECK(is_watertight(mesh));
    CHECK(mesh_volume_um3(mesh) == doctest::Approx(stack_volume_um3(stack, geom)));
}

TEST_CASE("stl export is bit-exact format arithmetic") {
    const PixelGeometry geom = pixel_geometry(3.0, 3);
    const TriangleMesh cube = voxel_surface(single_voxel_stack(), geom);
    REQUIRE(cube.triangles.size() == 12);

    const auto path = temp_file("cube.stl");
    export_stl(cube, path);
    CHECK(size_of(path) == 80 + 4 + 12 * 50);

    const auto path2 = temp_file("cube2.stl");
    export_stl(cube, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
}

TEST_CASE("stl export-parse round trip is lossless") {
    std::mt19937_64 rng(5);
    const SectionStack stack = random_stack(8, 8, 3, 0.5, rng);
    const PixelGeometry geom = pixel_geometry(200.0, 510);
    const TriangleMesh mesh = voxel_surface(stack, geom);
    REQUIRE(!mesh.triangles.empty());

    const auto path = temp_file("roundtrip.stl");
    export_stl(mesh, path);
    const TriangleMesh back = read_stl(path);
    REQUIRE(back.triangles.size() == mesh.triangles.size());
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
        const Triangle a = mesh.triangle(i);
        const Triangle b = back.triangle(i);
        for (const auto& [va, vb] : {std::pair{a.v0, b.v0}, {a.v1, b.v1}, {a.v2, b.v2}}) {
            CHECK(static_cast<float>(va.x) == static_cast<float>(vb.x));
            CHECK(static_cast<float>(va.y) == static_cast<float>(vb.y));
            CHECK(static_cast<float>(va.z) == static_cast<float>(vb.z));
        }
    }
}

TEST_CASE("stl export rejects empty meshes") {
    CHECK_THROWS(export_stl(TriangleMesh{}, temp_file("empty.stl")));
}
