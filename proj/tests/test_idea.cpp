#include <doctest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "idea23d/errors.hpp"
#include "idea23d/idea.hpp"
#include "idea23d/util.hpp"

namespace fs = std::filesystem;
using namespace idea23d;

TEST_SUITE("idea") {

TEST_CASE("text-only idea is valid") {
    Idea idea;
    idea.text_directives = {"a rabbit"};
    CHECK(validate_idea(idea).empty());
}

TEST_CASE("fully empty idea reports one violation") {
    Idea idea;
    auto v = validate_idea(idea);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "all components empty");
}

TEST_CASE("duplicate asset ids are reported by id") {
    Idea idea;
    ImageAsset a;
    a.id = "img0";
    a.image = Image(4, 4, {255, 0, 0, 255});
    idea.image_assets.push_back(a);
    idea.image_assets.push_back(a);
    auto v = validate_idea(idea);
    REQUIRE(!v.empty());
    CHECK(v[0] == "duplicate asset id img0");
}

TEST_CASE("unknown asset references are violations") {
    Idea idea;
    idea.text_directives = {"look at <asset:ghost>"};
    auto v = validate_idea(idea);
    REQUIRE(!v.empty());
    CHECK(v[0].find("ghost") != std::string::npos);
}

TEST_CASE("idea json round-trip is structurally equal") {
    Idea idea;
    idea.text_directives = {"a thing", "with <asset:img0>"};
    ImageAsset img;
    img.id = "img0";
    Rng rng(5);
    img.image = fixtures::random_image(rng, 9, 7);
    idea.image_assets.push_back(img);
    MeshAsset mesh = fixtures::quad_facing_z(true);
    mesh.id = "m0";
    idea.mesh_assets.push_back(mesh);

    Idea back = idea_from_json(idea_to_json(idea));
    CHECK(back.text_directives == idea.text_directives);
    REQUIRE(back.image_assets.size() == 1);
    CHECK(back.image_assets[0].id == "img0");
    CHECK(back.image_assets[0].image == idea.image_assets[0].image);
    REQUIRE(back.mesh_assets.size() == 1);
    CHECK(back.mesh_assets[0].geometry == idea.mesh_assets[0].geometry);
    CHECK(*back.mesh_assets[0].texture == *idea.mesh_assets[0].texture);
}

TEST_CASE("manifest loads assets relative to the manifest file") {
    fs::path dir = fs::temp_directory_path() / "idea23d_manifest_test";
    fs::create_directories(dir / "sub");
    save_png(Image(6, 6, {10, 20, 30, 255}), (dir / "sub" / "pic.png").string());
    save_glb(fixtures::cube(), (dir / "sub" / "cube.glb").string());
    write_file((dir / "idea.json").string(),
               std::string(R"({"text": ["use <asset:pic>"],
                  "images": [{"id": "pic", "path": "sub/pic.png"}],
                  "meshes": [{"id": "box", "path": "sub/cube.glb"}]})"));
    Idea idea = load_idea_manifest((dir / "idea.json").string());
    CHECK(idea.text_directives.size() == 1);
    CHECK(idea.image_assets.size() == 1);
    CHECK(idea.image_assets[0].image.width() == 6);
    CHECK(idea.mesh_assets.size() == 1);
    CHECK(idea.mesh_assets[0].id == "box");

    CHECK_THROWS_AS(load_idea_manifest((dir / "missing.json").string()), IoError);
}

TEST_CASE("asset references resolve to attachment positions") {
    std::string text = "match <asset:a> and <asset:b>, ignore <asset:zz>";
    std::string out = resolve_asset_references(text, {"a", "b"});
    CHECK(out == "match [attachment 1] and [attachment 2], ignore <asset:zz>");
}

}  // TEST_SUITE
