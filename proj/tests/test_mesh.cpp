#include <doctest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "idea23d/errors.hpp"
#include "idea23d/mesh.hpp"
#include "idea23d/util.hpp"

namespace fs = std::filesystem;
using namespace idea23d;

namespace {
std::string temp_dir() {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / ("idea23d_mesh_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir.string();
}
}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("validate_mesh flags the named defects") {
    TriangleMesh empty;
    CHECK(!validate_mesh(empty).empty());

    TriangleMesh bad_index;
    bad_index.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    bad_index.indices = {0, 1, 9};
    CHECK(!validate_mesh(bad_index).empty());

    TriangleMesh nan_pos;
    nan_pos.positions = {{0, 0, 0}, {1, 0, 0}, {0, std::nanf(""), 0}};
    nan_pos.indices = {0, 1, 2};
    CHECK(!validate_mesh(nan_pos).empty());

    CHECK(validate_mesh(fixtures::cube().geometry).empty());
}

TEST_CASE("glb round-trip preserves geometry, texture and digest") {
    MeshAsset tex_quad = fixtures::quad_facing_z(true);
    auto bytes = encode_glb(tex_quad);
    MeshAsset back = parse_glb(bytes, tex_quad.id);
    CHECK(back.geometry == tex_quad.geometry);
    REQUIRE(back.texture.has_value());
    CHECK(*back.texture == *tex_quad.texture);
    CHECK(mesh_content_digest(back) == mesh_content_digest(tex_quad));
}

TEST_CASE("obj round-trip preserves geometry and digest") {
    std::string dir = temp_dir();
    MeshAsset cube = fixtures::cube(0.37f);
    save_obj(cube, dir + "/cube.obj");
    MeshAsset back = load_obj(dir + "/cube.obj");
    CHECK(back.geometry.positions == cube.geometry.positions);
    CHECK(back.geometry.indices == cube.geometry.indices);
    CHECK(mesh_content_digest(back) == mesh_content_digest(cube));
}

TEST_CASE("obj with mtl texture loads the diffuse map") {
    std::string dir = temp_dir();
    MeshAsset quad = fixtures::quad_facing_z(true);
    save_obj(quad, dir + "/quad.obj");
    CHECK(fs::exists(dir + "/quad.mtl"));
    CHECK(fs::exists(dir + "/quad_diffuse.png"));
    MeshAsset back = load_obj(dir + "/quad.obj");
    REQUIRE(back.texture.has_value());
    CHECK(*back.texture == *quad.texture);
    CHECK(back.geometry.uvs == quad.geometry.uvs);
}

TEST_CASE("digest is identical across obj and glb round-trips") {
    std::string dir = temp_dir();
    MeshAsset quad = fixtures::quad_facing_z(true);
    save_obj(quad, dir + "/q.obj");
    save_glb(quad, dir + "/q.glb");
    CHECK(mesh_content_digest(load_obj(dir + "/q.obj")) ==
          mesh_content_digest(load_glb(dir + "/q.glb")));
}

TEST_CASE("obj parser handles quads and negative indices") {
    std::string dir = temp_dir();
    write_file(dir + "/tri.obj", std::string("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf -4 -3 -2 -1\n"));
    MeshAsset a = load_obj(dir + "/tri.obj");
    CHECK(a.geometry.triangle_count() == 2);
}

TEST_CASE("loaders report missing files and bad formats") {
    CHECK_THROWS_AS(load_obj("/nonexistent/x.obj"), IoError);
    CHECK_THROWS_AS(load_mesh("/tmp/whatever.stl"), IoError);
    std::vector<std::uint8_t> junk = {'n', 'o', 'p', 'e', 0, 0, 0, 0, 0, 0, 0, 0};
    CHECK_THROWS_AS(parse_glb(junk), IoError);
}

}  // TEST_SUITE
