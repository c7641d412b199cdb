#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "idea23d/image.hpp"
#include "idea23d/mesh.hpp"

namespace idea23d {

struct ImageAsset {
    std::string id;
    Image image;
    std::optional<std::string> source_path;
};

// The user's multimodal input: text directives plus image and mesh assets.
// Text directives may reference assets with `<asset:ID>` tokens; those are
// replaced by attachment positions at the backend boundary.
struct Idea {
    std::vector<std::string> text_directives;
    std::vector<ImageAsset> image_assets;
    std::vector<MeshAsset> mesh_assets;
};

struct ViewProvenance {
    std::string mesh_id;
    std::string view_name;
};

// Idea with every mesh replaced by its six rendered views. Original images
// come first, rendered views are appended; `view_provenance` maps rendered
// image ids back to (mesh id, view name).
struct AugmentedIdea {
    std::vector<std::string> text_directives;
    std::vector<ImageAsset> images;
    std::map<std::string, ViewProvenance> view_provenance;
};

struct ViewSet;  // render.hpp

// One candidate from an iteration's fan-out, with full provenance.
struct DraftModel {
    std::string draft_id;
    std::string prompt;
    ImageAsset gen_image;  // raw text-to-image output
    ImageAsset fg_image;   // after background removal
    MeshAsset mesh;
    // Six views keyed by canonical view order; stored flat to avoid a
    // circular include, see render.hpp for the ViewSet wrapper.
    std::vector<ImageAsset> views;
    int iteration = 0;
};

// Returns every invariant violation; empty means valid. Does not mutate.
std::vector<std::string> validate_idea(const Idea& idea);

// Loads {"text": [...], "images": [{"id","path"}], "meshes": [{"id","path"}]}
// with paths resolved relative to the manifest file.
Idea load_idea_manifest(const std::string& manifest_path);

// Lossless JSON serialization (pixel and geometry buffers embedded base64).
nlohmann::json idea_to_json(const Idea& idea);
Idea idea_from_json(const nlohmann::json& j);
nlohmann::json image_asset_to_json(const ImageAsset& a);
ImageAsset image_asset_from_json(const nlohmann::json& j);
nlohmann::json mesh_asset_to_json(const MeshAsset& a);
MeshAsset mesh_asset_from_json(const nlohmann::json& j);

// Replaces `<asset:ID>` references with `[attachment N]` (1-based) given the
// attachment order of asset ids.
std::string resolve_asset_references(const std::string& text,
                                     const std::vector<std::string>& attachment_ids);

}  // namespace idea23d
