#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "idea23d/errors.hpp"
#include "idea23d/memory.hpp"
#include "idea23d/render.hpp"
#include "idea23d/session.hpp"
#include "idea23d/util.hpp"

namespace fs = std::filesystem;
using namespace idea23d;
using json = nlohmann::json;

namespace {
MemoryRecord record(int iter, std::string prompt = "p", std::string feedback = "f") {
    MemoryRecord r;
    r.iteration = iter;
    r.best_prompt = std::move(prompt);
    r.best_draft_ref = {"draft-" + std::to_string(iter), std::string(64, 'a')};
    r.feedback = std::move(feedback);
    return r;
}

std::string temp_session_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("idea23d_sess_" + tag);
    fs::remove_all(dir);
    return dir.string();
}
}  // namespace

TEST_SUITE("memory") {

TEST_CASE("append enforces consecutive iterations") {
    Memory mem;
    mem.append(record(0));
    CHECK(mem.size() == 1);
    mem.append(record(1));

    CHECK_THROWS_AS(mem.append(record(1)), MemoryOrderError);  // duplicate
    CHECK_THROWS_AS(mem.append(record(3)), MemoryOrderError);  // gap
    CHECK(mem.size() == 2);
}

TEST_CASE("digest of empty memory is empty") {
    Memory mem;
    CHECK(mem.digest(512) == "");
}

TEST_CASE("digest renders one block per record verbatim, newest first") {
    Memory mem;
    mem.append(record(0, "red cube", "too round"));
    std::string d = mem.digest(512);
    CHECK(d == "[iter 0] prompt: red cube; feedback: too round");

    mem.append(record(1, "sharp red cube", "colors off"));
    d = mem.digest(512);
    CHECK(d.rfind("[iter 1]", 0) == 0);
    CHECK(d.find("[iter 0]") != std::string::npos);
    CHECK(d.find("[iter 1]") < d.find("[iter 0]"));
}

TEST_CASE("digest drops oldest blocks first, keeping the newest whole") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        Memory mem;
        int n = 2 + static_cast<int>(rng.next_below(5));
        for (int i = 0; i < n; ++i) {
            std::string prompt(1 + rng.next_below(200), 'p');
            std::string feedback(rng.next_below(120), 'x');
            mem.append(record(i, prompt, feedback));
        }
        std::size_t budget = 256 + rng.next_below(400);
        std::string d = mem.digest(budget);

        std::string newest = "[iter " + std::to_string(n - 1) + "]";
        CHECK(d.rfind(newest, 0) == 0);
        CHECK(d.find(mem.records().back().best_prompt) != std::string::npos);

        // Blocks appear newest-to-oldest without holes.
        int last_seen = n;
        std::size_t pos = 0;
        while ((pos = d.find("[iter ", pos)) != std::string::npos) {
            int k = std::stoi(d.substr(pos + 6));
            CHECK(k == last_seen - 1);
            last_seen = k;
            pos += 6;
        }
        if (d.size() > budget) {
            // Only possible when the newest block alone exceeds the budget.
            CHECK(last_seen == n - 1);
        }
    }
}

TEST_CASE("memory round-trips through json") {
    Memory mem;
    mem.append(record(0, "a", ""));
    mem.append(record(1, "b", "fix"));
    Memory back = Memory::from_json(mem.to_json());
    REQUIRE(back.size() == 2);
    CHECK(back.records()[1].best_prompt == "b");
    CHECK(back.records()[1].best_draft_ref.draft_id == "draft-1");
}

TEST_CASE("session log writes a schema header and loads back") {
    std::string dir = temp_session_dir("roundtrip");
    {
        SessionLog session(dir);
        session.append(json{{"type", "run_start"}, {"seed", 7}});
        Memory mem;
        mem.append(record(0));
        session.write_memory(mem);
    }
    LoadedSession loaded = load_session(dir);
    CHECK(loaded.schema_version == kSessionSchemaVersion);
    CHECK_FALSE(loaded.incomplete_final_event);
    REQUIRE(loaded.events.size() == 2);
    CHECK(loaded.events[0]["type"] == "schema");
    CHECK(loaded.events[1]["type"] == "run_start");
    CHECK(loaded.events[1].contains("ts"));
    REQUIRE(loaded.memory.size() == 1);
    CHECK(loaded.memory.records()[0].best_draft_ref.draft_id == "draft-0");
}

TEST_CASE("a truncated final line loads with a flag") {
    std::string dir = temp_session_dir("truncated");
    {
        SessionLog session(dir);
        session.append(json{{"type", "run_start"}});
    }
    {
        std::ofstream f(fs::path(dir) / "session.jsonl", std::ios::app);
        f << R"({"type":"iteration","iteration":0,"prompts":["a)";  // cut mid-write
    }
    LoadedSession loaded = load_session(dir);
    CHECK(loaded.incomplete_final_event);
    CHECK(loaded.events.size() == 2);  // schema + run_start survive
}

TEST_CASE("unknown schema versions are refused with both versions named") {
    std::string dir = temp_session_dir("version");
    fs::create_directories(dir);
    write_file(dir + "/session.jsonl", std::string(R"({"type":"schema","version":99})") + "\n");
    try {
        load_session(dir);
        FAIL("expected LoadError");
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find("99") != std::string::npos);
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
    CHECK_THROWS_AS(load_session(temp_session_dir("missing")), LoadError);
}

TEST_CASE("draft artifacts round-trip bit-exactly and replay the grid") {
    std::string dir = temp_session_dir("artifacts");
    SessionLog session(dir);

    DraftModel draft;
    draft.draft_id = "it0-p1-g0";
    draft.prompt = "a cube";
    draft.iteration = 0;
    Rng rng(3);
    draft.gen_image = {"gen", fixtures::random_image(rng, 24, 24), std::nullopt};
    draft.fg_image = {"gen:fg", fixtures::disk_image(24, 8, {10, 10, 200, 255}, {0, 0, 0, 0}),
                      std::nullopt};
    MeshAsset mesh = fixtures::quad_facing_z(true);
    mesh.id = "mesh-xyz";
    draft.mesh = mesh;
    RenderConfig cfg;
    cfg.width = 64;
    cfg.height = 64;
    draft.views = cm2i(mesh, cfg).to_assets();

    store_draft_artifacts(dir, draft, 1);
    DraftModel back = load_draft_artifacts(dir, 0, 1);
    CHECK(back.draft_id == draft.draft_id);
    CHECK(back.prompt == draft.prompt);
    CHECK(back.gen_image.image == draft.gen_image.image);
    CHECK(back.fg_image.image == draft.fg_image.image);
    CHECK(back.mesh.geometry == draft.mesh.geometry);
    CHECK(mesh_content_digest(back.mesh) == mesh_content_digest(draft.mesh));
    REQUIRE(back.views.size() == 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(back.views[i].image == draft.views[i].image);
        CHECK(back.views[i].id == draft.views[i].id);
    }

    // Selection inputs recompute bit-identically from the stored draft.
    ImageAsset grid_now = compose_view_grid(ViewSet::from_assets(mesh.id, draft.views));
    ImageAsset grid_replay = compose_view_grid(ViewSet::from_assets(back.mesh.id, back.views));
    CHECK(grid_now.image == grid_replay.image);

    CHECK_THROWS_AS(load_draft_artifacts(dir, 5, 0), LoadError);
}

}  // TEST_SUITE
