#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "idea23d/image.hpp"

namespace idea23d {

struct Vec3 {
    float x = 0.f, y = 0.f, z = 0.f;

    bool operator==(const Vec3&) const = default;
};

struct Vec2 {
    float u = 0.f, v = 0.f;

    bool operator==(const Vec2&) const = default;
};

// Indexed triangle mesh. `normals` and `uvs` are either empty or sized like
// `positions`. UV origin is top-left (image space); OBJ import flips V.
struct TriangleMesh {
    std::vector<Vec3> positions;
    std::vector<Vec3> normals;
    std::vector<Vec2> uvs;
    std::vector<std::uint32_t> indices;  // 3 per triangle

    std::size_t triangle_count() const { return indices.size() / 3; }
    bool has_normals() const { return !normals.empty(); }
    bool has_uvs() const { return !uvs.empty(); }

    bool operator==(const TriangleMesh&) const = default;
};

struct MeshAsset {
    std::string id;
    TriangleMesh geometry;
    std::optional<Image> texture;
    std::optional<std::string> source_path;
};

// Empty list means valid. Checks: >= 1 triangle, indices in range, finite
// positions, attribute array sizes.
std::vector<std::string> validate_mesh(const TriangleMesh& mesh);

// Canonical byte serialization (little-endian f32/u32 buffers plus texture
// raster); mesh identity is the sha256 of these bytes, so an OBJ/glTF
// round-trip does not change it.
std::vector<std::uint8_t> canonical_mesh_bytes(const TriangleMesh& mesh,
                                               const Image* texture = nullptr);
std::string mesh_content_digest(const MeshAsset& asset);

// Wavefront OBJ with optional MTL (single diffuse texture map).
MeshAsset load_obj(const std::string& path, const std::string& id = "");
void save_obj(const MeshAsset& asset, const std::string& path);

// Binary glTF, one mesh, optional base-color texture.
MeshAsset parse_glb(const std::vector<std::uint8_t>& bytes, const std::string& id = "");
std::vector<std::uint8_t> encode_glb(const MeshAsset& asset);
MeshAsset load_glb(const std::string& path, const std::string& id = "");
void save_glb(const MeshAsset& asset, const std::string& path);

// Dispatches on extension: .obj, .glb.
MeshAsset load_mesh(const std::string& path, const std::string& id = "");

}  // namespace idea23d
