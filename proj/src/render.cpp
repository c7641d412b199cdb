#include "idea23d/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "idea23d/errors.hpp"

namespace idea23d {

const char* view_name_str(ViewName v) {
    switch (v) {
        case ViewName::front: return "front";
        case ViewName::back: return "back";
        case ViewName::left: return "left";
        case ViewName::right: return "right";
        case ViewName::top: return "top";
        case ViewName::bottom: return "bottom";
    }
    return "?";
}

ViewName view_name_from_str(const std::string& s) {
    for (ViewName v : kViewOrder) {
        if (s == view_name_str(v)) return v;
    }
    throw ValidationError("unknown view name: " + s);
}

std::vector<ImageAsset> ViewSet::to_assets() const {
    return {views.begin(), views.end()};
}

ViewSet ViewSet::from_assets(const std::string& mesh_id, std::span<const ImageAsset> assets) {
    if (assets.size() != 6) throw ValidationError("view set requires exactly 6 images");
    ViewSet vs;
    vs.mesh_id = mesh_id;
    for (std::size_t i = 0; i < 6; ++i) vs.views[i] = assets[i];
    for (std::size_t i = 1; i < 6; ++i) {
        if (assets[i].image.width() != assets[0].image.width() ||
            assets[i].image.height() != assets[0].image.height()) {
            throw ValidationError("view set resolutions differ");
        }
    }
    return vs;
}

std::optional<std::string> RenderConfig::validate() const {
    if (width < 16 || height < 16) return "render resolution below 16x16";
    if (margin_fraction < 0.0 || margin_fraction >= 0.5) return "margin_fraction outside [0, 0.5)";
    if (banner_px < 8) return "banner_px below 8";
    return std::nullopt;
}

namespace {

struct Dvec {
    double x = 0, y = 0, z = 0;
};

Dvec cross(const Dvec& a, const Dvec& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double axis_component(const Dvec& p, int axis) {
    return axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
}

// Axis-aligned camera basis: every component is -1, 0 or +1, which keeps
// screen quantization mirror-exact between opposite views.
struct Camera {
    int fwd_axis;
    int fwd_sign;
    int right_axis;
    int right_sign;
    int up_axis;
    int up_sign;
};

Camera camera_for(ViewName v) {
    switch (v) {
        case ViewName::front:  return {2, -1, 0, +1, 1, +1};  // at +z
        case ViewName::back:   return {2, +1, 0, -1, 1, +1};  // at -z
        case ViewName::right:  return {0, -1, 2, -1, 1, +1};  // at +x
        case ViewName::left:   return {0, +1, 2, +1, 1, +1};  // at -x
        case ViewName::top:    return {1, -1, 0, -1, 2, +1};  // at +y
        case ViewName::bottom: return {1, +1, 0, +1, 2, +1};  // at -y
    }
    return {2, -1, 0, +1, 1, +1};
}

constexpr Rgba kBaseColor = {200, 200, 200, 255};
constexpr Rgba kBannerBg = {40, 40, 40, 255};
constexpr Rgba kBannerFg = {255, 255, 255, 255};

Rgba sample_texture(const Image& tex, double u, double v) {
    int tx = static_cast<int>(std::floor(u * tex.width()));
    int ty = static_cast<int>(std::floor(v * tex.height()));
    tx = std::clamp(tx, 0, tex.width() - 1);
    ty = std::clamp(ty, 0, tex.height() - 1);
    return tex.at(tx, ty);
}

std::uint8_t shade_channel(std::uint8_t c, int intensity) {
    return static_cast<std::uint8_t>((c * intensity + 128) >> 8);
}

}  // namespace

ViewSet cm2i(const MeshAsset& mesh, const RenderConfig& cfg,
             std::vector<std::string>* warnings) {
    if (auto issue = cfg.validate()) throw RenderError(*issue);
    auto mesh_issues = validate_mesh(mesh.geometry);
    if (!mesh_issues.empty()) throw RenderError("invalid mesh: " + mesh_issues.front());

    const TriangleMesh& m = mesh.geometry;

    Dvec mn{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
    Dvec mx{-std::numeric_limits<double>::max(), -std::numeric_limits<double>::max(),
            -std::numeric_limits<double>::max()};
    for (const Vec3& p : m.positions) {
        mn.x = std::min(mn.x, static_cast<double>(p.x));
        mn.y = std::min(mn.y, static_cast<double>(p.y));
        mn.z = std::min(mn.z, static_cast<double>(p.z));
        mx.x = std::max(mx.x, static_cast<double>(p.x));
        mx.y = std::max(mx.y, static_cast<double>(p.y));
        mx.z = std::max(mx.z, static_cast<double>(p.z));
    }
    double extent = std::max({mx.x - mn.x, mx.y - mn.y, mx.z - mn.z});
    if (!(extent > 0.0)) throw RenderError("degenerate geometry");
    Dvec center{(mn.x + mx.x) * 0.5, (mn.y + mx.y) * 0.5, (mn.z + mx.z) * 0.5};

    std::vector<Dvec> normalized(m.positions.size());
    for (std::size_t i = 0; i < m.positions.size(); ++i) {
        normalized[i] = {(m.positions[i].x - center.x) / extent,
                         (m.positions[i].y - center.y) / extent,
                         (m.positions[i].z - center.z) / extent};
    }

    double px_scale = (1.0 - 2.0 * cfg.margin_fraction) * std::min(cfg.width, cfg.height);
    // Per-axis quantized pixel offsets, shared by all views so opposite
    // cameras mirror exactly.
    std::vector<std::array<std::int64_t, 3>> q(normalized.size());
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        q[i] = {std::llround(16.0 * px_scale * normalized[i].x),
                std::llround(16.0 * px_scale * normalized[i].y),
                std::llround(16.0 * px_scale * normalized[i].z)};
    }

    bool textured = m.has_uvs() && mesh.texture && !mesh.texture->empty();
    if (m.has_uvs() && !textured && warnings) {
        warnings->push_back("mesh " + mesh.id + " has UVs but no texture; using flat base color");
    }

    const std::size_t tri_count = m.triangle_count();
    // Per-triangle flat-shading normals (world space, unit).
    std::vector<Dvec> face_normals(tri_count);
    for (std::size_t t = 0; t < tri_count; ++t) {
        const Dvec& a = normalized[m.indices[t * 3]];
        const Dvec& b = normalized[m.indices[t * 3 + 1]];
        const Dvec& c = normalized[m.indices[t * 3 + 2]];
        Dvec n = cross({b.x - a.x, b.y - a.y, b.z - a.z}, {c.x - a.x, c.y - a.y, c.z - a.z});
        double len = std::sqrt(n.x * n.x + n.y * n.y + n.z * n.z);
        if (len > 0) {
            n = {n.x / len, n.y / len, n.z / len};
        }
        face_normals[t] = n;
    }

    ViewSet out;
    out.mesh_id = mesh.id;

    const std::int64_t c16x = static_cast<std::int64_t>(cfg.width) * 8;   // 16 * w / 2
    const std::int64_t c16y = static_cast<std::int64_t>(cfg.height) * 8;

    for (ViewName vn : kViewOrder) {
        Camera cam = camera_for(vn);
        Image img(cfg.width, cfg.height, {0, 0, 0, 0});
        std::vector<double> zbuf(static_cast<std::size_t>(cfg.width) * cfg.height,
                                 std::numeric_limits<double>::infinity());

        for (std::size_t t = 0; t < tri_count; ++t) {
            std::uint32_t i0 = m.indices[t * 3];
            std::uint32_t i1 = m.indices[t * 3 + 1];
            std::uint32_t i2 = m.indices[t * 3 + 2];

            std::array<std::int64_t, 3> sx, sy;
            std::array<double, 3> depth;
            std::array<std::uint32_t, 3> vi = {i0, i1, i2};
            for (int k = 0; k < 3; ++k) {
                sx[k] = c16x + cam.right_sign * q[vi[k]][cam.right_axis];
                sy[k] = c16y - cam.up_sign * q[vi[k]][cam.up_axis];
                depth[k] = cam.fwd_sign * axis_component(normalized[vi[k]], cam.fwd_axis);
            }

            std::int64_t area2 =
                (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sy[1] - sy[0]) * (sx[2] - sx[0]);
            if (area2 == 0) continue;
            // Orient so barycentric weights come out non-negative inside.
            int flip = area2 < 0 ? -1 : 1;

            int min_px = static_cast<int>((std::min({sx[0], sx[1], sx[2]}) - 8) >> 4);
            int max_px = static_cast<int>((std::max({sx[0], sx[1], sx[2]}) + 8) >> 4);
            int min_py = static_cast<int>((std::min({sy[0], sy[1], sy[2]}) - 8) >> 4);
            int max_py = static_cast<int>((std::max({sy[0], sy[1], sy[2]}) + 8) >> 4);
            min_px = std::max(min_px, 0);
            min_py = std::max(min_py, 0);
            max_px = std::min(max_px, cfg.width - 1);
            max_py = std::min(max_py, cfg.height - 1);
            if (min_px > max_px || min_py > max_py) continue;

            double inten_dot = std::abs(axis_component(face_normals[t], cam.fwd_axis));
            int intensity = static_cast<int>(
                std::clamp<long long>(std::llround(inten_dot * 256.0), 64, 256));

            for (int py = min_py; py <= max_py; ++py) {
                std::int64_t cy = static_cast<std::int64_t>(py) * 16 + 8;
                for (int px = min_px; px <= max_px; ++px) {
                    std::int64_t cx = static_cast<std::int64_t>(px) * 16 + 8;
                    std::int64_t w0 = flip * ((sx[2] - sx[1]) * (cy - sy[1]) -
                                              (sy[2] - sy[1]) * (cx - sx[1]));
                    std::int64_t w1 = flip * ((sx[0] - sx[2]) * (cy - sy[2]) -
                                              (sy[0] - sy[2]) * (cx - sx[2]));
                    std::int64_t w2 = flip * ((sx[1] - sx[0]) * (cy - sy[0]) -
                                              (sy[1] - sy[0]) * (cx - sx[0]));
                    if (w0 < 0 || w1 < 0 || w2 < 0) continue;
                    double wsum = static_cast<double>(w0 + w1 + w2);
                    double d = (w0 * depth[0] + w1 * depth[1] + w2 * depth[2]) / wsum;
                    std::size_t pix = static_cast<std::size_t>(py) * cfg.width + px;
                    if (d < zbuf[pix]) {
                        zbuf[pix] = d;
                        Rgba base = kBaseColor;
                        if (textured) {
                            double u = (w0 * m.uvs[i0].u + w1 * m.uvs[i1].u + w2 * m.uvs[i2].u) /
                                       wsum;
                            double v = (w0 * m.uvs[i0].v + w1 * m.uvs[i1].v + w2 * m.uvs[i2].v) /
                                       wsum;
                            Rgba tex = sample_texture(*mesh.texture, u, v);
                            // Composite texture over base by texture alpha.
                            int a = tex.a;
                            base = {static_cast<std::uint8_t>((tex.r * a + base.r * (255 - a)) / 255),
                                    static_cast<std::uint8_t>((tex.g * a + base.g * (255 - a)) / 255),
                                    static_cast<std::uint8_t>((tex.b * a + base.b * (255 - a)) / 255),
                                    255};
                        }
                        img.set(px, py,
                                {shade_channel(base.r, intensity),
                                 shade_channel(base.g, intensity),
                                 shade_channel(base.b, intensity), 255});
                    }
                }
            }
        }

        std::size_t slot = static_cast<std::size_t>(vn);
        out.views[slot].id = mesh.id + ":" + view_name_str(vn);
        out.views[slot].image = std::move(img);
    }
    return out;
}

GridLayout view_grid_layout(const ViewSet& views, int banner_px) {
    return GridLayout{views.width(), views.height(), banner_px};
}

ImageAsset compose_view_grid(const ViewSet& views, int banner_px) {
    const int w = views.width();
    const int h = views.height();
    GridLayout layout = view_grid_layout(views, banner_px);

    Image grid(3 * w, 2 * (h + banner_px), {0, 0, 0, 0});
    static constexpr std::array<std::array<ViewName, 3>, 2> kCells = {{
        {ViewName::front, ViewName::back, ViewName::left},
        {ViewName::right, ViewName::top, ViewName::bottom},
    }};
    for (int row = 0; row < 2; ++row) {
        int banner_y = row * (banner_px + h);
        for (int col = 0; col < 3; ++col) {
            Image banner(w, banner_px, kBannerBg);
            draw_text(banner, view_name_str(kCells[row][col]), 6, (banner_px - 14) / 2, 2,
                      kBannerFg);
            grid.blit(banner, layout.cell_x(col), banner_y);
            grid.blit(views.view(kCells[row][col]).image, layout.cell_x(col),
                      layout.cell_y(row));
        }
    }

    ImageAsset out;
    out.id = views.mesh_id + ":grid";
    out.image = std::move(grid);
    return out;
}

ImageAsset compose_draft_lineup(std::span<const DraftModel> drafts, int banner_px) {
    if (drafts.empty()) throw ValidationError("draft lineup requires at least one draft");
    if (drafts.size() > 8) throw ValidationError("draft lineup limited to 8 drafts");

    std::vector<ImageAsset> grids;
    grids.reserve(drafts.size());
    for (const DraftModel& d : drafts) {
        ViewSet vs = ViewSet::from_assets(d.mesh.id, d.views);
        grids.push_back(compose_view_grid(vs, banner_px));
    }
    for (std::size_t i = 1; i < grids.size(); ++i) {
        if (grids[i].image.width() != grids[0].image.width() ||
            grids[i].image.height() != grids[0].image.height()) {
            throw ValidationError("resolution mismatch");
        }
    }

    const int gw = grids[0].image.width();
    const int gh = grids[0].image.height();
    Image lineup(static_cast<int>(grids.size()) * gw, gh + banner_px, {0, 0, 0, 0});
    for (std::size_t i = 0; i < grids.size(); ++i) {
        Image banner(gw, banner_px, kBannerBg);
        draw_text(banner, "draft " + std::to_string(i), 6, (banner_px - 14) / 2, 2, kBannerFg);
        lineup.blit(banner, static_cast<int>(i) * gw, 0);
        lineup.blit(grids[i].image, static_cast<int>(i) * gw, banner_px);
    }

    ImageAsset out;
    out.id = "lineup";
    out.image = std::move(lineup);
    return out;
}

}  // namespace idea23d
