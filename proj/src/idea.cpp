#include "idea23d/idea.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <set>

#include "idea23d/errors.hpp"
#include "idea23d/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace idea23d {

namespace {

// Extracts every `<asset:ID>` token.
std::vector<std::string> referenced_ids(const std::string& text) {
    std::vector<std::string> ids;
    std::size_t pos = 0;
    while ((pos = text.find("<asset:", pos)) != std::string::npos) {
        std::size_t end = text.find('>', pos);
        if (end == std::string::npos) break;
        ids.push_back(text.substr(pos + 7, end - pos - 7));
        pos = end + 1;
    }
    return ids;
}

}  // namespace

std::vector<std::string> validate_idea(const Idea& idea) {
    std::vector<std::string> violations;
    if (idea.text_directives.empty() && idea.image_assets.empty() && idea.mesh_assets.empty()) {
        violations.push_back("all components empty");
    }

    std::set<std::string> ids;
    auto check_id = [&](const std::string& id) {
        if (!ids.insert(id).second) {
            violations.push_back("duplicate asset id " + id);
        }
    };
    for (const auto& a : idea.image_assets) check_id(a.id);
    for (const auto& m : idea.mesh_assets) check_id(m.id);

    for (const auto& a : idea.image_assets) {
        if (a.image.width() < 1 || a.image.height() < 1) {
            violations.push_back("image asset " + a.id + " has empty raster");
        }
    }
    for (const auto& m : idea.mesh_assets) {
        for (const std::string& issue : validate_mesh(m.geometry)) {
            violations.push_back("mesh asset " + m.id + ": " + issue);
        }
    }
    for (const std::string& t : idea.text_directives) {
        for (const std::string& ref : referenced_ids(t)) {
            if (!ids.count(ref)) {
                violations.push_back("text references unknown asset id " + ref);
            }
        }
    }
    return violations;
}

Idea load_idea_manifest(const std::string& manifest_path) {
    json j;
    try {
        j = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw IoError("cannot parse idea manifest " + manifest_path + ": " + e.what());
    }
    fs::path base = fs::path(manifest_path).parent_path();

    Idea idea;
    for (const auto& t : j.value("text", json::array())) {
        idea.text_directives.push_back(t.get<std::string>());
    }
    for (const auto& e : j.value("images", json::array())) {
        ImageAsset a;
        a.id = e.at("id").get<std::string>();
        std::string p = (base / e.at("path").get<std::string>()).string();
        a.image = load_png(p);
        a.source_path = p;
        // Normalize: opaque images keep alpha 255 (decode already fills it).
        idea.image_assets.push_back(std::move(a));
    }
    for (const auto& e : j.value("meshes", json::array())) {
        std::string p = (base / e.at("path").get<std::string>()).string();
        idea.mesh_assets.push_back(load_mesh(p, e.at("id").get<std::string>()));
    }

    auto violations = validate_idea(idea);
    if (!violations.empty()) {
        throw ValidationError("invalid idea manifest " + manifest_path + ": " +
                              violations.front());
    }
    return idea;
}

namespace {

json image_to_json(const Image& img) {
    return json{{"width", img.width()},
                {"height", img.height()},
                {"pixels_b64", base64_encode(img.pixels())}};
}

Image image_from_json(const json& j) {
    Image img(j.at("width").get<int>(), j.at("height").get<int>());
    auto bytes = base64_decode(j.at("pixels_b64").get<std::string>());
    if (bytes.size() != img.pixels().size()) throw IoError("pixel buffer size mismatch");
    img.pixels() = std::move(bytes);
    return img;
}

template <typename T>
json floats_to_json(const std::vector<T>& v) {
    std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(v.data()),
                                        v.size() * sizeof(T));
    return base64_encode(bytes);
}

template <typename T>
std::vector<T> floats_from_json(const json& j) {
    auto bytes = base64_decode(j.get<std::string>());
    std::vector<T> out(bytes.size() / sizeof(T));
    std::memcpy(out.data(), bytes.data(), out.size() * sizeof(T));
    return out;
}

}  // namespace

json image_asset_to_json(const ImageAsset& a) {
    json j = image_to_json(a.image);
    j["id"] = a.id;
    if (a.source_path) j["source_path"] = *a.source_path;
    return j;
}

ImageAsset image_asset_from_json(const json& j) {
    ImageAsset a;
    a.id = j.at("id").get<std::string>();
    a.image = image_from_json(j);
    if (j.contains("source_path")) a.source_path = j["source_path"].get<std::string>();
    return a;
}

json mesh_asset_to_json(const MeshAsset& a) {
    json j;
    j["id"] = a.id;
    j["positions_b64"] = floats_to_json(a.geometry.positions);
    j["normals_b64"] = floats_to_json(a.geometry.normals);
    j["uvs_b64"] = floats_to_json(a.geometry.uvs);
    j["indices_b64"] = floats_to_json(a.geometry.indices);
    if (a.texture) j["texture"] = image_to_json(*a.texture);
    if (a.source_path) j["source_path"] = *a.source_path;
    return j;
}

MeshAsset mesh_asset_from_json(const json& j) {
    MeshAsset a;
    a.id = j.at("id").get<std::string>();
    a.geometry.positions = floats_from_json<Vec3>(j.at("positions_b64"));
    a.geometry.normals = floats_from_json<Vec3>(j.at("normals_b64"));
    a.geometry.uvs = floats_from_json<Vec2>(j.at("uvs_b64"));
    a.geometry.indices = floats_from_json<std::uint32_t>(j.at("indices_b64"));
    if (j.contains("texture")) a.texture = image_from_json(j["texture"]);
    if (j.contains("source_path")) a.source_path = j["source_path"].get<std::string>();
    return a;
}

json idea_to_json(const Idea& idea) {
    json j;
    j["text"] = idea.text_directives;
    j["images"] = json::array();
    for (const auto& a : idea.image_assets) j["images"].push_back(image_asset_to_json(a));
    j["meshes"] = json::array();
    for (const auto& m : idea.mesh_assets) j["meshes"].push_back(mesh_asset_to_json(m));
    return j;
}

Idea idea_from_json(const json& j) {
    Idea idea;
    for (const auto& t : j.value("text", json::array())) {
        idea.text_directives.push_back(t.get<std::string>());
    }
    for (const auto& e : j.value("images", json::array())) {
        idea.image_assets.push_back(image_asset_from_json(e));
    }
    for (const auto& e : j.value("meshes", json::array())) {
        idea.mesh_assets.push_back(mesh_asset_from_json(e));
    }
    return idea;
}

std::string resolve_asset_references(const std::string& text,
                                     const std::vector<std::string>& attachment_ids) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t start = text.find("<asset:", pos);
        if (start == std::string::npos) {
            out.append(text, pos, std::string::npos);
            break;
        }
        std::size_t end = text.find('>', start);
        if (end == std::string::npos) {
            out.append(text, pos, std::string::npos);
            break;
        }
        out.append(text, pos, start - pos);
        std::string id = text.substr(start + 7, end - start - 7);
        auto it = std::find(attachment_ids.begin(), attachment_ids.end(), id);
        if (it != attachment_ids.end()) {
            std::size_t n = static_cast<std::size_t>(it - attachment_ids.begin()) + 1;
            out += "[attachment " + std::to_string(n) + "]";
        } else {
            out.append(text, start, end - start + 1);
        }
        pos = end + 1;
    }
    return out;
}

}  // namespace idea23d
