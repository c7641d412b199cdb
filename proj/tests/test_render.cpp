#include <doctest.h>

#include "fixtures.hpp"
#include "idea23d/errors.hpp"
#include "idea23d/render.hpp"
#include "idea23d/util.hpp"
#include "render_oracle.hpp"

using namespace idea23d;

namespace {

std::vector<std::uint8_t> silhouette(const Image& img) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(img.width()) * img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            mask[static_cast<std::size_t>(y) * img.width() + x] = img.at(x, y).a > 0;
        }
    }
    return mask;
}

std::vector<std::uint8_t> mirror_x(const std::vector<std::uint8_t>& mask, int w, int h) {
    std::vector<std::uint8_t> out(mask.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out[static_cast<std::size_t>(y) * w + x] =
                mask[static_cast<std::size_t>(y) * w + (w - 1 - x)];
        }
    }
    return out;
}

RenderConfig small_cfg(int size = 128) {
    RenderConfig cfg;
    cfg.width = size;
    cfg.height = size;
    return cfg;
}

}  // namespace

TEST_SUITE("render") {

TEST_CASE("cube front silhouette is a centered square covering 90% of the frame") {
    RenderConfig cfg;  // 512x512, margin 0.05
    ViewSet views = cm2i(fixtures::cube(), cfg);
    const Image& front = views.view(ViewName::front).image;

    int min_x = 512, min_y = 512, max_x = -1, max_y = -1;
    for (int y = 0; y < 512; ++y) {
        for (int x = 0; x < 512; ++x) {
            if (front.at(x, y).a > 0) {
                min_x = std::min(min_x, x);
                min_y = std::min(min_y, y);
                max_x = std::max(max_x, x);
                max_y = std::max(max_y, y);
            }
        }
    }
    // 0.9 * 512 = 460.8; pixel centers inside [25.6, 486.4) span indexes 26..485.
    CHECK(min_x == 26);
    CHECK(max_x == 485);
    CHECK(min_y == 26);
    CHECK(max_y == 485);
    CHECK(max_x - min_x == max_y - min_y);
}

TEST_CASE("all six cube silhouettes are pixel-identical") {
    ViewSet views = cm2i(fixtures::cube(), small_cfg(256));
    auto reference = silhouette(views.view(ViewName::front).image);
    for (ViewName v : kViewOrder) {
        CHECK(silhouette(views.view(v).image) == reference);
    }
}

TEST_CASE("textured quad matches the per-pixel ray-cast oracle") {
    MeshAsset quad = fixtures::quad_facing_z(true);
    RenderConfig cfg;  // 512
    ViewSet views = cm2i(quad, cfg);
    for (ViewName v : kViewOrder) {
        Image expected = oracle::render_view(quad, cfg, v);
        CHECK(oracle::agreement(views.view(v).image, expected, 1) >= 0.99);
    }
}

TEST_CASE("sphere and non-convex shape match the oracle on every view") {
    for (const MeshAsset& mesh : {fixtures::uv_sphere(), fixtures::l_shape()}) {
        RenderConfig cfg = small_cfg(192);
        ViewSet views = cm2i(mesh, cfg);
        for (ViewName v : kViewOrder) {
            Image expected = oracle::render_view(mesh, cfg, v);
            CHECK(oracle::agreement(views.view(v).image, expected, 1) >= 0.99);
        }
    }
}

TEST_CASE("rendering is deterministic") {
    MeshAsset mesh = fixtures::uv_sphere();
    ViewSet a = cm2i(mesh, small_cfg());
    ViewSet b = cm2i(mesh, small_cfg());
    for (ViewName v : kViewOrder) {
        CHECK(a.view(v).image == b.view(v).image);
    }
}

TEST_CASE("uniform scaling leaves renders byte-identical") {
    MeshAsset cube = fixtures::cube();
    ViewSet reference = cm2i(cube, small_cfg());
    for (float s : {0.25f, 2.0f, 64.0f, 3.0f}) {
        MeshAsset scaled = cube;
        for (Vec3& p : scaled.geometry.positions) {
            p = {p.x * s, p.y * s, p.z * s};
        }
        ViewSet views = cm2i(scaled, small_cfg());
        for (ViewName v : kViewOrder) {
            CHECK(views.view(v).image == reference.view(v).image);
        }
    }
}

TEST_CASE("front silhouette mirrors the back silhouette for random meshes") {
    Rng rng(41);
    for (int trial = 0; trial < 8; ++trial) {
        MeshAsset mesh = fixtures::random_mesh(rng, 12);
        RenderConfig cfg = small_cfg();
        ViewSet views = cm2i(mesh, cfg);
        auto front = silhouette(views.view(ViewName::front).image);
        auto back = silhouette(views.view(ViewName::back).image);
        CHECK(front == mirror_x(back, cfg.width, cfg.height));
    }
}

TEST_CASE("no silhouette pixel falls into the margin border") {
    Rng rng(42);
    RenderConfig cfg = small_cfg(200);  // margin 0.05 -> border 10px
    for (int trial = 0; trial < 6; ++trial) {
        MeshAsset mesh = fixtures::random_mesh(rng, 10);
        ViewSet views = cm2i(mesh, cfg);
        int border = static_cast<int>(cfg.margin_fraction * cfg.width);
        for (ViewName v : kViewOrder) {
            const Image& img = views.view(v).image;
            for (int y = 0; y < cfg.height; ++y) {
                for (int x = 0; x < cfg.width; ++x) {
                    if (img.at(x, y).a > 0) {
                        CHECK(x >= border);
                        CHECK(x < cfg.width - border);
                        CHECK(y >= border);
                        CHECK(y < cfg.height - border);
                    }
                }
            }
        }
    }
}

TEST_CASE("degenerate geometry is rejected") {
    MeshAsset point;
    point.id = "point";
    point.geometry.positions = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
    point.geometry.indices = {0, 1, 2};
    CHECK_THROWS_WITH_AS(cm2i(point, small_cfg()), "degenerate geometry", RenderError);
}

TEST_CASE("uvs without texture render flat and warn") {
    MeshAsset quad = fixtures::quad_facing_z(true);
    quad.texture.reset();
    std::vector<std::string> warnings;
    ViewSet views = cm2i(quad, small_cfg(), &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("no texture") != std::string::npos);
    // Front face shades the base gray at full intensity.
    Rgba center = views.view(ViewName::front).image.at(64, 64);
    CHECK(center == Rgba{200, 200, 200, 255});
}

TEST_CASE("view grid has the documented size, order and determinism") {
    ViewSet views = cm2i(fixtures::cube(), RenderConfig{});
    ImageAsset grid = compose_view_grid(views, 24);
    CHECK(grid.image.width() == 1536);   // 3 * 512
    CHECK(grid.image.height() == 1072);  // 2 * (512 + 24)
    CHECK(grid.image == compose_view_grid(views, 24).image);
}

TEST_CASE("every grid cell equals the standalone view raster") {
    ViewSet views = cm2i(fixtures::l_shape(), small_cfg());
    GridLayout layout = view_grid_layout(views);
    ImageAsset grid = compose_view_grid(views);
    const std::array<std::array<ViewName, 3>, 2> cells = {{
        {ViewName::front, ViewName::back, ViewName::left},
        {ViewName::right, ViewName::top, ViewName::bottom},
    }};
    for (int row = 0; row < 2; ++row) {
        for (int col = 0; col < 3; ++col) {
            Image cell = grid.image.crop(layout.cell_x(col), layout.cell_y(row), layout.cell_w,
                                         layout.cell_h);
            CHECK(cell == views.view(cells[row][col]).image);
        }
    }
}

namespace {
DraftModel draft_from(const MeshAsset& mesh, const RenderConfig& cfg, int iteration) {
    DraftModel d;
    d.draft_id = "d";
    d.prompt = "p";
    d.mesh = mesh;
    d.views = cm2i(mesh, cfg).to_assets();
    d.iteration = iteration;
    return d;
}
}  // namespace

TEST_CASE("draft lineup stacks grids with index banners") {
    RenderConfig cfg = small_cfg();
    std::vector<DraftModel> drafts = {draft_from(fixtures::cube(), cfg, 0),
                                      draft_from(fixtures::uv_sphere(), cfg, 0),
                                      draft_from(fixtures::l_shape(), cfg, 0)};
    ImageAsset lineup = compose_draft_lineup(drafts, 24);
    int grid_w = 3 * cfg.width;
    int grid_h = 2 * (cfg.height + 24);
    CHECK(lineup.image.width() == 3 * grid_w);
    CHECK(lineup.image.height() == grid_h + 24);

    // Single draft: its grid under one index banner.
    ImageAsset single = compose_draft_lineup(std::span(drafts.data(), 1), 24);
    CHECK(single.image.width() == grid_w);
    CHECK(single.image.height() == grid_h + 24);
    ViewSet vs = ViewSet::from_assets(drafts[0].mesh.id, drafts[0].views);
    CHECK(single.image.crop(0, 24, grid_w, grid_h) == compose_view_grid(vs, 24).image);

    // Golden banner raster: "draft 2" drawn the same way at the cell origin.
    Image golden(grid_w, 24, {40, 40, 40, 255});
    draw_text(golden, "draft 2", 6, 5, 2, {255, 255, 255, 255});
    CHECK(lineup.image.crop(2 * grid_w, 0, grid_w, 24) == golden);
}

TEST_CASE("draft lineup rejects mixed resolutions and size overflow") {
    RenderConfig cfg_a = small_cfg(128);
    RenderConfig cfg_b = small_cfg(160);
    std::vector<DraftModel> mixed = {draft_from(fixtures::cube(), cfg_a, 0),
                                     draft_from(fixtures::cube(), cfg_b, 0)};
    CHECK_THROWS_WITH_AS(compose_draft_lineup(mixed), "resolution mismatch", ValidationError);

    std::vector<DraftModel> many(9, draft_from(fixtures::cube(), cfg_a, 0));
    CHECK_THROWS_AS(compose_draft_lineup(many), ValidationError);
    CHECK_THROWS_AS(compose_draft_lineup(std::span<const DraftModel>{}), ValidationError);
}

}  // TEST_SUITE
