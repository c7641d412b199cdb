#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idea23d/idea.hpp"
#include "idea23d/image.hpp"
#include "idea23d/mesh.hpp"

namespace idea23d {

enum class ViewName { front, back, left, right, top, bottom };

constexpr std::array<ViewName, 6> kViewOrder = {ViewName::front, ViewName::back,
                                                ViewName::left,  ViewName::right,
                                                ViewName::top,   ViewName::bottom};

const char* view_name_str(ViewName v);
ViewName view_name_from_str(const std::string& s);

// Six renders of one mesh, all at the same resolution, transparent outside
// the silhouette. Stored in kViewOrder.
struct ViewSet {
    std::string mesh_id;
    std::array<ImageAsset, 6> views;

    const ImageAsset& view(ViewName v) const {
        return views[static_cast<std::size_t>(v)];
    }
    int width() const { return views[0].image.width(); }
    int height() const { return views[0].image.height(); }

    std::vector<ImageAsset> to_assets() const;
    static ViewSet from_assets(const std::string& mesh_id,
                               std::span<const ImageAsset> assets);
};

struct RenderConfig {
    int width = 512;
    int height = 512;
    double margin_fraction = 0.05;
    int banner_px = 24;

    // nullopt means valid
    std::optional<std::string> validate() const;
};

// Deterministic orthographic software rasterization of a mesh into the six
// canonical views.
//
// Geometry contract (the basis of the determinism and symmetry guarantees,
// and of the independent per-pixel oracle used by the tests):
//   - the mesh is translated so its AABB center sits at the origin and
//     uniformly scaled so the largest extent is 1;
//   - cameras are axis-aligned: front/back look along -z/+z (up +y),
//     right/left along -x/+x (up +y), top/bottom along -y/+y (up +z);
//   - a vertex's screen position is frame center plus per-axis offsets
//     quantized to 1/16 pixel: q[axis] = llround(16 * s * p[axis]) with
//     s = (1 - 2*margin) * min(w, h);
//   - coverage is an inclusive integer edge test at pixel centers (16x + 8);
//   - depth is the barycentric interpolation of dot(p, forward) in double,
//     compared strictly less-than, so equal depth keeps the lower triangle
//     index;
//   - flat shading: intensity = clamp(llround(256 * |n . forward|), 64, 256)
//     from the world-space face normal, applied as (c * i + 128) >> 8;
//   - texels are sampled nearest: floor(u * tw) clamped to the texture.
//
// Backface culling is off. Throws RenderError("degenerate geometry") when
// the mesh has zero extent in every axis. A textured-UV mesh without a
// texture renders with the flat base color and reports a warning.
ViewSet cm2i(const MeshAsset& mesh, const RenderConfig& cfg,
             std::vector<std::string>* warnings = nullptr);

// One 3x2 grid: rows (front, back, left) and (right, top, bottom), each row
// preceded by a banner strip labeling the cells. Output is
// (3w) x (2 * (h + banner)).
ImageAsset compose_view_grid(const ViewSet& views, int banner_px = 24);

// All draft grids side by side, each under an index banner ("draft 0"...).
// Throws on empty input, more than 8 drafts, or mixed grid resolutions.
ImageAsset compose_draft_lineup(std::span<const DraftModel> drafts, int banner_px = 24);

// Grid geometry helpers shared with tests and the session replay check.
struct GridLayout {
    int cell_w = 0, cell_h = 0, banner_px = 0;
    int cell_x(int col) const { return col * cell_w; }
    int cell_y(int row) const { return row * (banner_px + cell_h) + banner_px; }
};
GridLayout view_grid_layout(const ViewSet& views, int banner_px = 24);

}  // namespace idea23d
