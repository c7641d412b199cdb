#include "idea23d/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "idea23d/errors.hpp"
#include "idea23d/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace idea23d {

std::vector<std::string> validate_mesh(const TriangleMesh& mesh) {
    std::vector<std::string> issues;
    if (mesh.indices.size() < 3 || mesh.indices.size() % 3 != 0) {
        issues.push_back("mesh has no complete triangle");
    }
    for (std::uint32_t i : mesh.indices) {
        if (i >= mesh.positions.size()) {
            issues.push_back("index out of range: " + std::to_string(i));
            break;
        }
    }
    for (const Vec3& p : mesh.positions) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
            issues.push_back("non-finite vertex position");
            break;
        }
    }
    if (!mesh.normals.empty() && mesh.normals.size() != mesh.positions.size()) {
        issues.push_back("normal count does not match position count");
    }
    if (!mesh.uvs.empty() && mesh.uvs.size() != mesh.positions.size()) {
        issues.push_back("uv count does not match position count");
    }
    return issues;
}

namespace {

void push_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
    buf.push_back(v & 0xff);
    buf.push_back((v >> 8) & 0xff);
    buf.push_back((v >> 16) & 0xff);
    buf.push_back((v >> 24) & 0xff);
}

void push_f32(std::vector<std::uint8_t>& buf, float f) {
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    push_u32(buf, v);
}

}  // namespace

std::vector<std::uint8_t> canonical_mesh_bytes(const TriangleMesh& mesh, const Image* texture) {
    std::vector<std::uint8_t> buf;
    push_u32(buf, static_cast<std::uint32_t>(mesh.positions.size()));
    for (const Vec3& p : mesh.positions) {
        push_f32(buf, p.x);
        push_f32(buf, p.y);
        push_f32(buf, p.z);
    }
    push_u32(buf, static_cast<std::uint32_t>(mesh.normals.size()));
    for (const Vec3& n : mesh.normals) {
        push_f32(buf, n.x);
        push_f32(buf, n.y);
        push_f32(buf, n.z);
    }
    push_u32(buf, static_cast<std::uint32_t>(mesh.uvs.size()));
    for (const Vec2& t : mesh.uvs) {
        push_f32(buf, t.u);
        push_f32(buf, t.v);
    }
    push_u32(buf, static_cast<std::uint32_t>(mesh.indices.size()));
    for (std::uint32_t i : mesh.indices) push_u32(buf, i);
    if (texture && !texture->empty()) {
        push_u32(buf, static_cast<std::uint32_t>(texture->width()));
        push_u32(buf, static_cast<std::uint32_t>(texture->height()));
        buf.insert(buf.end(), texture->pixels().begin(), texture->pixels().end());
    } else {
        push_u32(buf, 0);
        push_u32(buf, 0);
    }
    return buf;
}

std::string mesh_content_digest(const MeshAsset& asset) {
    auto bytes = canonical_mesh_bytes(asset.geometry,
                                      asset.texture ? &*asset.texture : nullptr);
    return sha256_hex(bytes);
}

// ---------------------------------------------------------------- OBJ ------

namespace {

struct ObjIndex {
    int v = 0, vt = 0, vn = 0;

    bool operator<(const ObjIndex& o) const {
        return std::tie(v, vt, vn) < std::tie(o.v, o.vt, o.vn);
    }
};

ObjIndex parse_obj_index(const std::string& tok) {
    ObjIndex ix;
    std::size_t p1 = tok.find('/');
    if (p1 == std::string::npos) {
        ix.v = std::stoi(tok);
        return ix;
    }
    ix.v = std::stoi(tok.substr(0, p1));
    std::size_t p2 = tok.find('/', p1 + 1);
    if (p2 == std::string::npos) {
        ix.vt = std::stoi(tok.substr(p1 + 1));
        return ix;
    }
    if (p2 > p1 + 1) ix.vt = std::stoi(tok.substr(p1 + 1, p2 - p1 - 1));
    if (p2 + 1 < tok.size()) ix.vn = std::stoi(tok.substr(p2 + 1));
    return ix;
}

int resolve_obj_ref(int ref, std::size_t count) {
    if (ref > 0) return ref - 1;
    if (ref < 0) return static_cast<int>(count) + ref;
    return -1;
}

// Returns the first map_Kd path found in an MTL file, if any.
std::optional<std::string> mtl_diffuse_map(const std::string& mtl_path) {
    std::ifstream f(mtl_path);
    if (!f) return std::nullopt;
    std::string line;
    while (std::getline(f, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "map_Kd") {
            std::string rest;
            std::getline(ls, rest);
            std::size_t start = rest.find_first_not_of(" \t");
            if (start != std::string::npos) {
                std::size_t end = rest.find_last_not_of(" \t\r");
                return rest.substr(start, end - start + 1);
            }
        }
    }
    return std::nullopt;
}

}  // namespace

MeshAsset load_obj(const std::string& path, const std::string& id) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open OBJ file: " + path);

    std::vector<Vec3> positions, normals;
    std::vector<Vec2> uvs;
    std::vector<ObjIndex> face_corners;
    std::vector<int> face_sizes;
    std::optional<std::string> mtl_file;

    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "v") {
            Vec3 p;
            ls >> p.x >> p.y >> p.z;
            positions.push_back(p);
        } else if (key == "vn") {
            Vec3 n;
            ls >> n.x >> n.y >> n.z;
            normals.push_back(n);
        } else if (key == "vt") {
            Vec2 t;
            ls >> t.u >> t.v;
            t.v = 1.0f - t.v;  // OBJ V origin is bottom-left
            uvs.push_back(t);
        } else if (key == "f") {
            std::string tok;
            int n = 0;
            while (ls >> tok) {
                face_corners.push_back(parse_obj_index(tok));
                ++n;
            }
            if (n < 3) throw IoError("OBJ face with fewer than 3 vertices: " + path);
            face_sizes.push_back(n);
        } else if (key == "mtllib") {
            std::string name;
            ls >> name;
            mtl_file = name;
        }
    }

    MeshAsset asset;
    asset.id = id.empty() ? fs::path(path).stem().string() : id;
    asset.source_path = path;

    // Weld identical (v, vt, vn) triples into shared vertices.
    std::map<ObjIndex, std::uint32_t> remap;
    bool any_uv = !uvs.empty();
    bool any_normal = !normals.empty();
    auto emit_vertex = [&](const ObjIndex& ix) -> std::uint32_t {
        auto it = remap.find(ix);
        if (it != remap.end()) return it->second;
        int vi = resolve_obj_ref(ix.v, positions.size());
        if (vi < 0 || vi >= static_cast<int>(positions.size())) {
            throw IoError("OBJ vertex index out of range: " + path);
        }
        asset.geometry.positions.push_back(positions[vi]);
        if (any_uv) {
            int ti = resolve_obj_ref(ix.vt, uvs.size());
            asset.geometry.uvs.push_back(ti >= 0 && ti < static_cast<int>(uvs.size())
                                             ? uvs[ti]
                                             : Vec2{});
        }
        if (any_normal) {
            int ni = resolve_obj_ref(ix.vn, normals.size());
            asset.geometry.normals.push_back(ni >= 0 && ni < static_cast<int>(normals.size())
                                                 ? normals[ni]
                                                 : Vec3{});
        }
        std::uint32_t out = static_cast<std::uint32_t>(asset.geometry.positions.size() - 1);
        remap.emplace(ix, out);
        return out;
    };

    std::size_t corner = 0;
    for (int n : face_sizes) {
        std::uint32_t first = emit_vertex(face_corners[corner]);
        std::uint32_t prev = emit_vertex(face_corners[corner + 1]);
        for (int k = 2; k < n; ++k) {
            std::uint32_t cur = emit_vertex(face_corners[corner + k]);
            asset.geometry.indices.push_back(first);
            asset.geometry.indices.push_back(prev);
            asset.geometry.indices.push_back(cur);
            prev = cur;
        }
        corner += n;
    }

    if (mtl_file) {
        fs::path mtl_path = fs::path(path).parent_path() / *mtl_file;
        if (auto map = mtl_diffuse_map(mtl_path.string())) {
            fs::path tex_path = fs::path(path).parent_path() / *map;
            if (fs::exists(tex_path)) {
                asset.texture = load_png(tex_path.string());
            }
        }
    }

    auto issues = validate_mesh(asset.geometry);
    if (!issues.empty()) throw IoError("invalid mesh in " + path + ": " + issues.front());
    return asset;
}

void save_obj(const MeshAsset& asset, const std::string& path) {
    const TriangleMesh& m = asset.geometry;
    std::ostringstream out;
    char buf[128];

    fs::path base(path);
    std::string stem = base.stem().string();
    if (asset.texture) {
        out << "mtllib " << stem << ".mtl\n";
    }
    for (const Vec3& p : m.positions) {
        // %.9g round-trips float32 exactly
        std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", p.x, p.y, p.z);
        out << buf;
    }
    for (const Vec2& t : m.uvs) {
        std::snprintf(buf, sizeof(buf), "vt %.9g %.9g\n", t.u, 1.0f - t.v);
        out << buf;
    }
    for (const Vec3& n : m.normals) {
        std::snprintf(buf, sizeof(buf), "vn %.9g %.9g %.9g\n", n.x, n.y, n.z);
        out << buf;
    }
    if (asset.texture) out << "usemtl material0\n";
    bool has_uv = m.has_uvs();
    bool has_n = m.has_normals();
    for (std::size_t i = 0; i + 2 < m.indices.size(); i += 3) {
        out << "f";
        for (int k = 0; k < 3; ++k) {
            std::uint32_t ix = m.indices[i + k] + 1;
            out << ' ' << ix;
            if (has_uv && has_n) {
                out << '/' << ix << '/' << ix;
            } else if (has_uv) {
                out << '/' << ix;
            } else if (has_n) {
                out << "//" << ix;
            }
        }
        out << '\n';
    }
    write_file(path, out.str());

    if (asset.texture) {
        fs::path dir = base.parent_path();
        std::string tex_name = stem + "_diffuse.png";
        save_png(*asset.texture, (dir / tex_name).string());
        std::string mtl = "newmtl material0\nKd 1 1 1\nmap_Kd " + tex_name + "\n";
        write_file((dir / (stem + ".mtl")).string(), mtl);
    }
}

// ---------------------------------------------------------------- GLB ------

namespace {

constexpr std::uint32_t kGlbMagic = 0x46546C67;  // "glTF"
constexpr std::uint32_t kChunkJson = 0x4E4F534A;
constexpr std::uint32_t kChunkBin = 0x004E4942;

std::uint32_t read_u32le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct BufferViewSlice {
    const std::uint8_t* data;
    std::size_t length;
    std::size_t stride;  // 0 = tightly packed
};

BufferViewSlice view_slice(const json& gltf, const std::vector<std::uint8_t>& bin, int view_ix) {
    const json& view = gltf.at("bufferViews").at(view_ix);
    std::size_t offset = view.value("byteOffset", 0u);
    std::size_t length = view.at("byteLength").get<std::size_t>();
    std::size_t stride = view.value("byteStride", 0u);
    if (offset + length > bin.size()) throw IoError("glTF buffer view out of range");
    return {bin.data() + offset, length, stride};
}

template <typename T>
std::vector<T> read_accessor_vecs(const json& gltf, const std::vector<std::uint8_t>& bin,
                                  int accessor_ix, int components) {
    const json& acc = gltf.at("accessors").at(accessor_ix);
    if (acc.at("componentType").get<int>() != 5126) {
        throw IoError("glTF attribute accessor must be float");
    }
    std::size_t count = acc.at("count").get<std::size_t>();
    std::size_t acc_offset = acc.value("byteOffset", 0u);
    BufferViewSlice slice = view_slice(gltf, bin, acc.at("bufferView").get<int>());
    std::size_t stride = slice.stride ? slice.stride : components * 4u;
    std::vector<T> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t* src = slice.data + acc_offset + i * stride;
        std::memcpy(&out[i], src, components * 4u);
    }
    return out;
}

std::vector<std::uint32_t> read_indices(const json& gltf, const std::vector<std::uint8_t>& bin,
                                        int accessor_ix) {
    const json& acc = gltf.at("accessors").at(accessor_ix);
    int ctype = acc.at("componentType").get<int>();
    std::size_t count = acc.at("count").get<std::size_t>();
    std::size_t acc_offset = acc.value("byteOffset", 0u);
    BufferViewSlice slice = view_slice(gltf, bin, acc.at("bufferView").get<int>());
    std::vector<std::uint32_t> out(count);
    const std::uint8_t* p = slice.data + acc_offset;
    for (std::size_t i = 0; i < count; ++i) {
        if (ctype == 5121) {
            out[i] = p[i];
        } else if (ctype == 5123) {
            out[i] = static_cast<std::uint32_t>(p[i * 2]) |
                     (static_cast<std::uint32_t>(p[i * 2 + 1]) << 8);
        } else if (ctype == 5125) {
            out[i] = read_u32le(p + i * 4);
        } else {
            throw IoError("unsupported glTF index component type");
        }
    }
    return out;
}

}  // namespace

MeshAsset parse_glb(const std::vector<std::uint8_t>& bytes, const std::string& id) {
    if (bytes.size() < 12 || read_u32le(bytes.data()) != kGlbMagic) {
        throw IoError("not a binary glTF stream");
    }
    if (read_u32le(bytes.data() + 4) != 2) throw IoError("unsupported glTF version");

    json gltf;
    std::vector<std::uint8_t> bin;
    std::size_t offset = 12;
    while (offset + 8 <= bytes.size()) {
        std::uint32_t len = read_u32le(bytes.data() + offset);
        std::uint32_t type = read_u32le(bytes.data() + offset + 4);
        offset += 8;
        if (offset + len > bytes.size()) throw IoError("truncated glTF chunk");
        if (type == kChunkJson) {
            gltf = json::parse(bytes.begin() + offset, bytes.begin() + offset + len);
        } else if (type == kChunkBin) {
            bin.assign(bytes.begin() + offset, bytes.begin() + offset + len);
        }
        offset += len;
    }
    if (gltf.is_null()) throw IoError("glTF JSON chunk missing");
    if (!gltf.contains("meshes") || gltf["meshes"].empty()) {
        throw IoError("glTF contains no mesh");
    }

    MeshAsset asset;
    asset.id = id;
    TriangleMesh& m = asset.geometry;

    int texture_image = -1;
    for (const json& prim : gltf["meshes"][0].at("primitives")) {
        if (prim.value("mode", 4) != 4) throw IoError("glTF primitive is not triangles");
        const json& attrs = prim.at("attributes");
        auto positions = read_accessor_vecs<Vec3>(gltf, bin, attrs.at("POSITION").get<int>(), 3);
        std::vector<Vec3> normals;
        std::vector<Vec2> uvs;
        if (attrs.contains("NORMAL")) {
            normals = read_accessor_vecs<Vec3>(gltf, bin, attrs.at("NORMAL").get<int>(), 3);
        }
        if (attrs.contains("TEXCOORD_0")) {
            uvs = read_accessor_vecs<Vec2>(gltf, bin, attrs.at("TEXCOORD_0").get<int>(), 2);
        }
        std::uint32_t base = static_cast<std::uint32_t>(m.positions.size());
        m.positions.insert(m.positions.end(), positions.begin(), positions.end());
        if (!normals.empty()) m.normals.insert(m.normals.end(), normals.begin(), normals.end());
        if (!uvs.empty()) m.uvs.insert(m.uvs.end(), uvs.begin(), uvs.end());

        std::vector<std::uint32_t> idx;
        if (prim.contains("indices")) {
            idx = read_indices(gltf, bin, prim.at("indices").get<int>());
        } else {
            idx.resize(positions.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
        }
        for (std::uint32_t i : idx) m.indices.push_back(base + i);

        if (texture_image < 0 && prim.contains("material")) {
            const json& mat = gltf.at("materials").at(prim["material"].get<int>());
            if (mat.contains("pbrMetallicRoughness")) {
                const json& pbr = mat["pbrMetallicRoughness"];
                if (pbr.contains("baseColorTexture")) {
                    int tex_ix = pbr["baseColorTexture"].at("index").get<int>();
                    texture_image = gltf.at("textures").at(tex_ix).at("source").get<int>();
                }
            }
        }
    }
    // Attribute arrays must cover all vertices or none.
    if (!m.normals.empty() && m.normals.size() != m.positions.size()) m.normals.clear();
    if (!m.uvs.empty() && m.uvs.size() != m.positions.size()) m.uvs.clear();

    if (texture_image >= 0) {
        const json& img = gltf.at("images").at(texture_image);
        if (img.contains("bufferView")) {
            BufferViewSlice slice = view_slice(gltf, bin, img["bufferView"].get<int>());
            std::vector<std::uint8_t> png_bytes(slice.data, slice.data + slice.length);
            asset.texture = decode_png(png_bytes);
        }
    }

    auto issues = validate_mesh(m);
    if (!issues.empty()) throw IoError("invalid glTF mesh: " + issues.front());
    return asset;
}

std::vector<std::uint8_t> encode_glb(const MeshAsset& asset) {
    const TriangleMesh& m = asset.geometry;
    std::vector<std::uint8_t> bin;
    json views = json::array();
    json accessors = json::array();

    auto add_view = [&](const void* data, std::size_t bytes) -> int {
        while (bin.size() % 4) bin.push_back(0);
        json v;
        v["buffer"] = 0;
        v["byteOffset"] = bin.size();
        v["byteLength"] = bytes;
        const auto* p = static_cast<const std::uint8_t*>(data);
        bin.insert(bin.end(), p, p + bytes);
        views.push_back(v);
        return static_cast<int>(views.size() - 1);
    };

    json attrs;
    {
        int view = add_view(m.positions.data(), m.positions.size() * sizeof(Vec3));
        Vec3 mn = m.positions.empty() ? Vec3{} : m.positions[0];
        Vec3 mx = mn;
        for (const Vec3& p : m.positions) {
            mn.x = std::min(mn.x, p.x);
            mn.y = std::min(mn.y, p.y);
            mn.z = std::min(mn.z, p.z);
            mx.x = std::max(mx.x, p.x);
            mx.y = std::max(mx.y, p.y);
            mx.z = std::max(mx.z, p.z);
        }
        json acc;
        acc["bufferView"] = view;
        acc["componentType"] = 5126;
        acc["count"] = m.positions.size();
        acc["type"] = "VEC3";
        acc["min"] = {mn.x, mn.y, mn.z};
        acc["max"] = {mx.x, mx.y, mx.z};
        accessors.push_back(acc);
        attrs["POSITION"] = static_cast<int>(accessors.size() - 1);
    }
    if (m.has_normals()) {
        int view = add_view(m.normals.data(), m.normals.size() * sizeof(Vec3));
        accessors.push_back({{"bufferView", view},
                             {"componentType", 5126},
                             {"count", m.normals.size()},
                             {"type", "VEC3"}});
        attrs["NORMAL"] = static_cast<int>(accessors.size() - 1);
    }
    if (m.has_uvs()) {
        int view = add_view(m.uvs.data(), m.uvs.size() * sizeof(Vec2));
        accessors.push_back({{"bufferView", view},
                             {"componentType", 5126},
                             {"count", m.uvs.size()},
                             {"type", "VEC2"}});
        attrs["TEXCOORD_0"] = static_cast<int>(accessors.size() - 1);
    }
    int index_accessor;
    {
        int view = add_view(m.indices.data(), m.indices.size() * sizeof(std::uint32_t));
        accessors.push_back({{"bufferView", view},
                             {"componentType", 5125},
                             {"count", m.indices.size()},
                             {"type", "SCALAR"}});
        index_accessor = static_cast<int>(accessors.size() - 1);
    }

    json gltf;
    gltf["asset"] = {{"version", "2.0"}, {"generator", "idea23d"}};
    json prim;
    prim["attributes"] = attrs;
    prim["indices"] = index_accessor;
    prim["mode"] = 4;

    if (asset.texture) {
        auto png = encode_png(*asset.texture);
        int view = add_view(png.data(), png.size());
        gltf["images"] = json::array({{{"bufferView", view}, {"mimeType", "image/png"}}});
        gltf["samplers"] = json::array({{{"magFilter", 9728}, {"minFilter", 9728}}});
        gltf["textures"] = json::array({{{"source", 0}, {"sampler", 0}}});
        gltf["materials"] = json::array(
            {{{"pbrMetallicRoughness",
               {{"baseColorTexture", {{"index", 0}}}, {"metallicFactor", 0.0}}}}});
        prim["material"] = 0;
    }

    gltf["meshes"] = json::array({{{"primitives", json::array({prim})}}});
    gltf["nodes"] = json::array({{{"mesh", 0}}});
    gltf["scenes"] = json::array({{{"nodes", {0}}}});
    gltf["scene"] = 0;
    gltf["bufferViews"] = views;
    gltf["accessors"] = accessors;
    gltf["buffers"] = json::array({{{"byteLength", bin.size()}}});

    std::string json_text = gltf.dump();
    while (json_text.size() % 4) json_text.push_back(' ');
    while (bin.size() % 4) bin.push_back(0);

    std::vector<std::uint8_t> out;
    push_u32(out, kGlbMagic);
    push_u32(out, 2);
    push_u32(out, static_cast<std::uint32_t>(12 + 8 + json_text.size() + 8 + bin.size()));
    push_u32(out, static_cast<std::uint32_t>(json_text.size()));
    push_u32(out, kChunkJson);
    out.insert(out.end(), json_text.begin(), json_text.end());
    push_u32(out, static_cast<std::uint32_t>(bin.size()));
    push_u32(out, kChunkBin);
    out.insert(out.end(), bin.begin(), bin.end());
    return out;
}

MeshAsset load_glb(const std::string& path, const std::string& id) {
    std::string data = read_file(path);
    std::vector<std::uint8_t> bytes(data.begin(), data.end());
    MeshAsset asset = parse_glb(bytes, id.empty() ? fs::path(path).stem().string() : id);
    asset.source_path = path;
    return asset;
}

void save_glb(const MeshAsset& asset, const std::string& path) {
    write_file(path, std::span<const std::uint8_t>(encode_glb(asset)));
}

MeshAsset load_mesh(const std::string& path, const std::string& id) {
    std::string ext = to_lower(fs::path(path).extension().string());
    if (ext == ".obj") return load_obj(path, id);
    if (ext == ".glb") return load_glb(path, id);
    throw IoError("unsupported mesh format (expected .obj or .glb): " + path);
}

}  // namespace idea23d
