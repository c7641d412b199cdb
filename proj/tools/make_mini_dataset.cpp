// Regenerates the committed miniature evaluation dataset (12 cases with the
// same modality and tag mix ratios as the full 198-case set) plus a small
// demo idea. Assets are produced by the deterministic mock backends so
// offline runs carry a real alignment signal.

#include <filesystem>
#include <iostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "idea23d/image.hpp"
#include "idea23d/mesh.hpp"
#include "idea23d/mock_backends.hpp"
#include "idea23d/rembg.hpp"
#include "idea23d/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace idea23d;

namespace {

struct CaseSpec {
    std::string id;
    std::string text;
    std::string image_words;  // empty = no image asset
    std::string mesh_words;   // empty = no mesh asset
    std::vector<std::string> tags;
};

Image make_bar_image(const std::string& words, std::uint64_t seed) {
    MockT2iBackend t2i;
    return t2i.generate(words, 1, seed)[0];
}

MeshAsset make_bar_mesh(const std::string& words, std::uint64_t seed) {
    Image img = make_bar_image(words, seed);
    Image fg = remove_background(img);
    MockI23dBackend i23d;
    return i23d.generate(fg, seed);
}

}  // namespace

int main(int argc, char** argv) {
    std::string out_root = argc > 1 ? argv[1] : "data";

    // Modality mix 1/3/4/4 and tag mix 1/4/7 mirror the full set's
    // 9/57/68/64 and 9/62/127 within rounding at 12 cases.
    const std::vector<CaseSpec> cases = {
        {"case-00", "a red rabbit", "", "", {}},
        {"case-01", "a golden crown", "ring", "", {"style"}},
        {"case-02", "a blue boat", "anchor", "", {"color", "object"}},
        {"case-03", "a green dragon", "castle", "", {"creature", "scene"}},
        {"case-04", "a white owl", "", "tree", {"animal"}},
        {"case-05", "a silver robot", "", "rocket", {"machine", "scifi"}},
        {"case-06", "a purple teapot", "", "table", {"object", "color"}},
        {"case-07", "a yellow fish", "", "barrel", {"animal"}},
        {"case-08", "a pink flower", "vase", "bench", {"plant", "scene"}},
        {"case-09", "a black spider", "lantern", "bridge", {"creature", "scene"}},
        {"case-10", "a copper lamp", "candle", "statue", {"object", "material"}},
        {"case-11", "a striped turtle", "mushroom", "pumpkin", {"animal"}},
    };

    fs::path dataset_dir = fs::path(out_root) / "mini_dataset";
    fs::create_directories(dataset_dir / "assets");

    json manifest;
    manifest["cases"] = json::array();
    std::uint64_t seed = 20240101;

    for (const CaseSpec& c : cases) {
        json entry;
        entry["id"] = c.id;
        entry["text"] = json::array({c.text});
        entry["tags"] = c.tags;

        std::string caption = c.text;
        entry["images"] = json::array();
        if (!c.image_words.empty()) {
            std::string name = c.id + "-img.png";
            Image img = make_bar_image(c.image_words, mix_seed(seed, fnv1a64(c.id + "img")));
            save_png(img, (dataset_dir / "assets" / name).string());
            entry["images"].push_back({{"id", c.id + "-img"}, {"path", "assets/" + name}});
            caption += " " + c.image_words;
        }
        entry["meshes"] = json::array();
        if (!c.mesh_words.empty()) {
            std::string name = c.id + "-mesh.glb";
            MeshAsset mesh =
                make_bar_mesh(c.mesh_words, mix_seed(seed, fnv1a64(c.id + "mesh")));
            save_glb(mesh, (dataset_dir / "assets" / name).string());
            entry["meshes"].push_back({{"id", c.id + "-mesh"}, {"path", "assets/" + name}});
            caption += " " + c.mesh_words;
        }
        entry["gt_caption"] = caption;
        manifest["cases"].push_back(std::move(entry));
    }
    write_file((dataset_dir / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cout << "wrote " << (dataset_dir / "manifest.json").string() << "\n";

    // Demo idea for the run subcommand: text plus one image and one mesh.
    fs::path demo_dir = fs::path(out_root) / "demo";
    fs::create_directories(demo_dir);
    save_png(make_bar_image("doughnut", mix_seed(seed, 0xd0u)),
             (demo_dir / "doughnut.png").string());
    save_glb(make_bar_mesh("rabbit", mix_seed(seed, 0xd1u)), (demo_dir / "rabbit.glb").string());
    json demo{{"text", {"a fluffy pet eating the snack shown in <asset:donut-img>, "
                        "posed like the animal in <asset:rabbit-mesh>"}},
              {"images", {{{"id", "donut-img"}, {"path", "doughnut.png"}}}},
              {"meshes", {{{"id", "rabbit-mesh"}, {"path", "rabbit.glb"}}}}};
    write_file((demo_dir / "idea.json").string(), demo.dump(2) + "\n");
    std::cout << "wrote " << (demo_dir / "idea.json").string() << "\n";
    return 0;
}
