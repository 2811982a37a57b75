#include "octa/volume.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace octa::vol {

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

}  // namespace

void SectionStack::validate() const {
    if (sections.empty()) throw std::invalid_argument("SectionStack: no sections");
    if (slice_distance_um <= 0.0)
        throw std::invalid_argument("SectionStack: non-positive slice distance");
    const BinaryMask& first = sections.front();
    for (const BinaryMask& m : sections) {
        m.validate();
        if (m.width != first.width || m.height != first.height ||
            m.scan_size_um != first.scan_size_um)
            throw std::invalid_argument("SectionStack: section dimensions differ");
    }
}

double stack_volume_um3(const SectionStack& stack, const PixelGeometry& geom) {
    stack.validate();
    std::size_t voxels = 0;
    for (const BinaryMask& m : stack.sections) voxels += m.count_true();
    const double pixel_area_um2 = geom.pixel_pitch_um * geom.pixel_pitch_um;
    return static_cast<double>(voxels) * pixel_area_um2 * stack.slice_distance_um;
}

namespace {

// Boundary face of one voxel: the owning voxel's linear index and the four
// corner grid points in outward-CCW order.
struct BoundaryFace {
    std::size_t voxel;
    std::uint64_t corner[4];  // packed grid coordinates
};

struct SurfaceBuilder {
    int w, h, depth;
    std::uint64_t packed(int ix, int iy, int iz) const {
        return static_cast<std::uint64_t>(ix) +
               static_cast<std::uint64_t>(w + 1) *
                   (static_cast<std::uint64_t>(iy) +
                    static_cast<std::uint64_t>(h + 1) * static_cast<std::uint64_t>(iz));
    }

    std::vector<BoundaryFace> faces;

    void add_face(std::size_t voxel, const std::array<std::array<int, 3>, 4>& corners) {
        BoundaryFace f;
        f.voxel = voxel;
        for (int i = 0; i < 4; ++i) f.corner[i] = packed(corners[i][0], corners[i][1], corners[i][2]);
        faces.push_back(f);
    }
};

// Union-find over face-corner instances; vertex identity propagates only
// through paired edges, which splits the pinched sheets apart.
struct DisjointSet {
    std::vector<std::uint32_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0u);
    }
    std::uint32_t find(std::uint32_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    void unite(std::uint32_t a, std::uint32_t b) { parent[find(a)] = find(b); }
};

}  // namespace

TriangleMesh voxel_surface(const SectionStack& stack, const PixelGeometry& geom) {
    stack.validate();
    SurfaceBuilder b;
    b.w = stack.sections.front().width;
    b.h = stack.sections.front().height;
    b.depth = static_cast<int>(stack.sections.size());

    auto filled = [&](int x, int y, int k) {
        if (x < 0 || y < 0 || k < 0 || x >= b.w || y >= b.h || k >= b.depth) return false;
        return stack.sections[static_cast<std::size_t>(k)].test(x, y);
    };
    auto voxel_id = [&](int x, int y, int k) {
        return (static_cast<std::size_t>(k) * b.h + y) * b.w + x;
    };

    for (int k = 0; k < b.depth; ++k) {
        for (int y = 0; y < b.h; ++y) {
            for (int x = 0; x < b.w; ++x) {
                if (!filled(x, y, k)) continue;
                const std::size_t id = voxel_id(x, y, k);
                const int x1 = x + 1, y1 = y + 1, k1 = k + 1;
                // Face order fixed: -x, +x, -y, +y, -z, +z; windings give
                // outward normals under the right-hand rule.
                if (!filled(x - 1, y, k))
                    b.add_face(id, {{{x, y, k}, {x, y, k1}, {x, y1, k1}, {x, y1, k}}});
                if (!filled(x + 1, y, k))
                    b.add_face(id, {{{x1, y, k}, {x1, y1, k}, {x1, y1, k1}, {x1, y, k1}}});
                if (!filled(x, y - 1, k))
                    b.add_face(id, {{{x, y, k}, {x1, y, k}, {x1, y, k1}, {x, y, k1}}});
                if (!filled(x, y + 1, k))
                    b.add_face(id, {{{x, y1, k}, {x, y1, k1}, {x1, y1, k1}, {x1, y1, k}}});
                if (!filled(x, y, k - 1))
                    b.add_face(id, {{{x, y, k}, {x, y1, k}, {x1, y1, k}, {x1, y, k}}});
                if (!filled(x, y, k + 1))
                    b.add_face(id, {{{x, y, k1}, {x1, y, k1}, {x1, y1, k1}, {x, y1, k1}}});
            }
        }
    }

    // Match each face edge with its partner. Grid edges carry either two
    // boundary faces (manifold) or four (two voxels touching diagonally);
    // in the four-face case the faces of the same voxel pair up.
    struct EdgeUse {
        std::uint32_t face;
        std::uint8_t slot;  // perimeter edge (slot, slot+1 mod 4)
    };
    std::unordered_map<std::uint64_t, std::vector<EdgeUse>> edge_uses;
    auto edge_key = [](std::uint64_t a, std::uint64_t bb) {
        const std::uint64_t lo = a < bb ? a : bb;
        const std::uint64_t hi = a < bb ? bb : a;
        // Corner ids stay well below 2^32 for supported stack sizes.
        return (hi << 32) | lo;
    };
    for (std::uint32_t fi = 0; fi < b.faces.size(); ++fi)
        for (std::uint8_t s = 0; s < 4; ++s)
            edge_uses[edge_key(b.faces[fi].corner[s], b.faces[fi].corner[(s + 1) % 4])].push_back(
                {fi, s});

    DisjointSet dsu(b.faces.size() * 4);
    auto corner_instance = [](std::uint32_t face, int slot) { return face * 4 + slot; };
    auto unite_edge = [&](const EdgeUse& ea, const EdgeUse& eb) {
        const BoundaryFace& fa = b.faces[ea.face];
        const BoundaryFace& fb = b.faces[eb.face];
        const int a0 = ea.slot, a1 = (ea.slot + 1) % 4;
        const int b0 = eb.slot, b1 = (eb.slot + 1) % 4;
        if (fa.corner[a0] == fb.corner[b0]) {
            dsu.unite(corner_instance(ea.face, a0), corner_instance(eb.face, b0));
            dsu.unite(corner_instance(ea.face, a1), corner_instance(eb.face, b1));
        } else {
            dsu.unite(corner_instance(ea.face, a0), corner_instance(eb.face, b1));
            dsu.unite(corner_instance(ea.face, a1), corner_instance(eb.face, b0));
        }
    };
    for (auto& [key, uses] : edge_uses) {
        if (uses.size() == 2) {
            unite_edge(uses[0], uses[1]);
        } else if (uses.size() == 4) {
            for (std::size_t i = 1; i < 4; ++i)
                if (b.faces[uses[i].face].voxel == b.faces[uses[0].face].voxel) {
                    unite_edge(uses[0], uses[i]);
                    unite_edge(uses[i == 1 ? 2 : 1], uses[i == 3 ? 2 : 3]);
                    break;
                }
        } else {
            throw std::logic_error("voxel_surface: grid edge with unexpected face count");
        }
    }

    const double p = geom.pixel_pitch_um;
    const double d = stack.slice_distance_um;
    const auto w1 = static_cast<std::uint64_t>(b.w + 1);
    const auto h1 = static_cast<std::uint64_t>(b.h + 1);

    TriangleMesh mesh;
    std::unordered_map<std::uint32_t, std::uint32_t> vertex_of_root;
    auto vertex_index = [&](std::uint32_t face, int slot) {
        const std::uint32_t root = dsu.find(corner_instance(face, slot));
        const auto [it, inserted] =
            vertex_of_root.emplace(root, static_cast<std::uint32_t>(mesh.vertices.size()));
        if (inserted) {
            const std::uint64_t packed = b.faces[face].corner[slot];
            const double ix = static_cast<double>(packed % w1);
            const double iy = static_cast<double>((packed / w1) % h1);
            const double iz = static_cast<double>(packed / (w1 * h1));
            mesh.vertices.push_back({ix * p, iy * p, iz * d});
        }
        return it->second;
    };

    mesh.triangles.reserve(b.faces.size() * 2);
    for (std::uint32_t fi = 0; fi < b.faces.size(); ++fi) {
        const std::uint32_t c0 = vertex_index(fi, 0);
        const std::uint32_t c1 = vertex_index(fi, 1);
        const std::uint32_t c2 = vertex_index(fi, 2);
        const std::uint32_t c3 = vertex_index(fi, 3);
        mesh.triangles.push_back({c0, c1, c2});
        mesh.triangles.push_back({c0, c2, c3});
    }
    return mesh;
}

bool is_watertight(const TriangleMesh& mesh) {
    if (mesh.triangles.empty()) return false;

    std::unordered_map<std::uint64_t, int> edges;
    auto edge_key = [](std::uint32_t a, std::uint32_t b) {
        return (static_cast<std::uint64_t>(a) << 32) | b;
    };
    for (const auto& t : mesh.triangles) {
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) return false;
        for (std::uint32_t v : t)
            if (v >= mesh.vertices.size()) return false;
        ++edges[edge_key(t[0], t[1])];
        ++edges[edge_key(t[1], t[2])];
        ++edges[edge_key(t[2], t[0])];
    }
    // Consistent winding: each directed edge once, its reverse once.
    for (const auto& [key, count] : edges) {
        if (count != 1) return false;
        const auto a = static_cast<std::uint32_t>(key >> 32);
        const auto bb = static_cast<std::uint32_t>(key & 0xffffffffu);
        const auto rev = edges.find(edge_key(bb, a));
        if (rev == edges.end() || rev->second != 1) return false;
    }
    return true;
}

double mesh_volume_um3(const TriangleMesh& mesh) {
    if (!is_watertight(mesh)) throw std::invalid_argument("mesh_volume: mesh is not watertight");
    double six_v = 0.0;
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
        const Triangle t = mesh.triangle(i);
        six_v += dot(t.v0, cross(t.v1, t.v2));
    }
    return six_v / 6.0;
}

void export_stl(const TriangleMesh& mesh, const std::filesystem::path& path) {
    if (mesh.triangles.empty()) throw std::invalid_argument("export_stl: empty mesh");
    if (mesh.triangles.size() > 0xffffffffull)
        throw std::invalid_argument("export_stl: triangle count exceeds STL limit");
    static_assert(std::endian::native == std::endian::little,
                  "binary STL writer assumes a little-endian host");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());

    char header[80] = {};
    std::strncpy(header, "octa voxel surface mesh", sizeof(header) - 1);
    out.write(header, sizeof(header));
    const std::uint32_t count = static_cast<std::uint32_t>(mesh.triangles.size());
    out.write(reinterpret_cast<const char*>(&count), 4);

    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
        const Triangle t = mesh.triangle(i);
        Vec3 n = cross(sub(t.v1, t.v0), sub(t.v2, t.v0));
        const double len = std::sqrt(dot(n, n));
        if (len > 0.0) {
            n.x /= len;
            n.y /= len;
            n.z /= len;
        }
        const float rec[12] = {
            static_cast<float>(n.x),    static_cast<float>(n.y),    static_cast<float>(n.z),
            static_cast<float>(t.v0.x), static_cast<float>(t.v0.y), static_cast<float>(t.v0.z),
            static_cast<float>(t.v1.x), static_cast<float>(t.v1.y), static_cast<float>(t.v1.z),
            static_cast<float>(t.v2.x), static_cast<float>(t.v2.y), static_cast<float>(t.v2.z)};
        out.write(reinterpret_cast<const char*>(rec), 48);
        const std::uint16_t attr = 0;
        out.write(reinterpret_cast<const char*>(&attr), 2);
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

TriangleMesh read_stl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    char header[80];
    in.read(header, sizeof(header));
    std::uint32_t count = 0;
    in.read(reinterpret_cast<char*>(&count), 4);
    if (!in) throw std::runtime_error("STL: truncated header in " + path.string());

    TriangleMesh mesh;
    mesh.triangles.reserve(count);
    struct Key {
        std::uint32_t bits[3];
        bool operator==(const Key& o) const {
            return bits[0] == o.bits[0] && bits[1] == o.bits[1] && bits[2] == o.bits[2];
        }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = 14695981039346656037ull;
            for (std::uint32_t b : k.bits) {
                h ^= b;
                h *= 1099511628211ull;
            }
            return static_cast<std::size_t>(h);
        }
    };
    std::unordered_map<Key, std::uint32_t, KeyHash> ids;
    auto vertex_id = [&](const float* v) {
        Key k{{std::bit_cast<std::uint32_t>(v[0]), std::bit_cast<std::uint32_t>(v[1]),
               std::bit_cast<std::uint32_t>(v[2])}};
        const auto [it, inserted] = ids.emplace(k, static_cast<std::uint32_t>(mesh.vertices.size()));
        if (inserted) mesh.vertices.push_back({v[0], v[1], v[2]});
        return it->second;
    };

    for (std::uint32_t i = 0; i < count; ++i) {
        float rec[12];
        std::uint16_t attr;
        in.read(reinterpret_cast<char*>(rec), 48);
        in.read(reinterpret_cast<char*>(&attr), 2);
        if (!in) throw std::runtime_error("STL: truncated triangle data in " + path.string());
        mesh.triangles.push_back({vertex_id(rec + 3), vertex_id(rec + 6), vertex_id(rec + 9)});
    }
    return mesh;
}

}  // namespace octa::vol
