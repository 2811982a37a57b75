#pragma once
// 3D volumetry from stacked section masks: voxel-sum volume, watertight
// voxel surface extraction, binary STL export, and the mesh-side volume
// used to cross-check the voxel sum.

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "octa/image.hpp"

namespace octa::vol {

// Ordered co-registered section masks separated by a fixed axial distance.
struct SectionStack {
    std::vector<BinaryMask> sections;
    double slice_distance_um = 25.0;

    void validate() const;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct Triangle {
    Vec3 v0, v1, v2;
};

// Indexed triangle mesh, vertices in um. Outward orientation is carried by
// the winding, so the signed volume of a well-formed mesh is positive.
// Voxel surfaces duplicate vertices where two sheets pinch together, which
// keeps every undirected edge on exactly two triangles.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;

    Triangle triangle(std::size_t i) const {
        const auto& t = triangles[i];
        return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
    }
};

// Total true-voxel volume: count * pitch^2 * slice distance, in um^3.
double stack_volume_um3(const SectionStack& stack, const PixelGeometry& geom);

// Surface of the voxel set as axis-aligned quads split into triangles, two
// per face adjacent to background or the stack boundary. Non-manifold grid
// edges (voxels meeting diagonally) are resolved by pairing the faces of
// the same voxel, so the result is always watertight. Triangle order is
// canonical (section, row, column, face) so exports are byte-stable.
TriangleMesh voxel_surface(const SectionStack& stack, const PixelGeometry& geom);

// Every undirected edge shared by exactly two triangles, in opposite
// directions.
bool is_watertight(const TriangleMesh& mesh);

// Signed tetrahedron sum (divergence theorem). Throws on a mesh that is not
// watertight.
double mesh_volume_um3(const TriangleMesh& mesh);

// Binary STL: 80-byte header, little-endian uint32 count, 50 bytes per
// triangle, attribute bytes zero. Byte-identical for identical meshes.
void export_stl(const TriangleMesh& mesh, const std::filesystem::path& path);

// Rebuilds an indexed mesh from a binary STL, merging bit-identical vertex
// coordinates.
TriangleMesh read_stl(const std::filesystem::path& path);

}  // namespace octa::vol
