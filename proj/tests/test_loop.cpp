#include <doctest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "idea23d/errors.hpp"
#include "idea23d/loop.hpp"
#include "idea23d/mock_backends.hpp"
#include "idea23d/util.hpp"

namespace fs = std::filesystem;
using namespace idea23d;
using json = nlohmann::json;

namespace {

LoopConfig small_loop_cfg() {
    LoopConfig cfg;
    cfg.render.width = 96;
    cfg.render.height = 96;
    cfg.seed = 11;
    return cfg;
}

BackendPolicy fast_policy() {
    BackendPolicy p;
    p.backoff_base_s = 0.0;
    return p;
}

Idea text_idea(const std::string& text) {
    Idea idea;
    idea.text_directives = {text};
    return idea;
}

std::string temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("idea23d_loop_" + tag);
    fs::remove_all(dir);
    return dir.string();
}

int count_lmm_calls(const std::vector<json>& events) {
    int n = 0;
    for (const auto& e : events) {
        if (e.value("type", "") == "backend_call" && e.value("role", "") == "lmm") ++n;
    }
    return n;
}

}  // namespace

TEST_SUITE("loop") {

TEST_CASE("augment appends six views per mesh with provenance") {
    Rng rng(8);
    Idea idea;
    idea.text_directives = {"combine"};
    idea.image_assets.push_back({"pic", fixtures::random_image(rng, 16, 16), std::nullopt});
    idea.mesh_assets.push_back(fixtures::cube());

    RenderConfig cfg;
    cfg.width = 32;
    cfg.height = 32;
    AugmentedIdea x = augment(idea, cfg);
    CHECK(x.images.size() == 7);  // 1 original + 6 views
    CHECK(x.images[0].id == "pic");
    CHECK(x.view_provenance.size() == 6);
    CHECK(x.view_provenance.count("cube:front") == 1);
    CHECK(x.view_provenance.at("cube:front").mesh_id == "cube");
    CHECK(x.view_provenance.count("pic") == 0);

    Idea no_mesh;
    no_mesh.text_directives = {"t"};
    no_mesh.image_assets = idea.image_assets;
    AugmentedIdea x2 = augment(no_mesh, cfg);
    CHECK(x2.images.size() == 1);
    CHECK(x2.view_provenance.empty());

    Idea two_meshes;
    two_meshes.text_directives = {"t"};
    two_meshes.mesh_assets.push_back(fixtures::cube());
    two_meshes.mesh_assets.back().id = "a";
    two_meshes.mesh_assets.push_back(fixtures::uv_sphere());
    two_meshes.mesh_assets.back().id = "b";
    AugmentedIdea x3 = augment(two_meshes, cfg);
    CHECK(x3.images.size() == 12);
    CHECK(x3.view_provenance.size() == 12);
    int a_views = 0;
    for (const auto& [id, prov] : x3.view_provenance) {
        if (prov.mesh_id == "a") ++a_views;
    }
    CHECK(a_views == 6);
}

TEST_CASE("generate_prompts parses a numbered list") {
    GatewayBackends b = make_mock_backends(1);
    b.lmm = std::make_shared<ScriptedLmmBackend>(std::vector<std::string>{"1. a\n2. b\n3. c"});
    Gateway gw(std::move(b), fast_policy());
    RefineLoop loop(gw, PromptTemplates::builtin(), small_loop_cfg());

    AugmentedIdea x = augment(text_idea("thing"), small_loop_cfg().render);
    NullSink sink;
    auto prompts = loop.generate_prompts(x, std::nullopt, Memory{}, 3, 0, sink);
    CHECK(prompts == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("duplicate prompts are re-asked once, then padded") {
    GatewayBackends b = make_mock_backends(1);
    auto scripted = std::make_shared<ScriptedLmmBackend>(
        std::vector<std::string>{"1. a\n2. a\n3. c", "1. a\n2. a\n3. c"});
    b.lmm = scripted;
    Gateway gw(std::move(b), fast_policy());
    RefineLoop loop(gw, PromptTemplates::builtin(), small_loop_cfg());

    AugmentedIdea x = augment(text_idea("thing"), small_loop_cfg().render);
    NullSink sink;
    auto prompts = loop.generate_prompts(x, std::nullopt, Memory{}, 3, 0, sink);
    CHECK(scripted->calls() == 2);  // re-asked exactly once
    CHECK(prompts ==
          std::vector<std::string>{"a", "a (alternative composition)", "c"});
}

TEST_CASE("unparseable prompt output aborts after two re-asks") {
    GatewayBackends b = make_mock_backends(1);
    auto scripted = std::make_shared<ScriptedLmmBackend>(
        std::vector<std::string>{"nonsense", "still nonsense", "1. only one"});
    b.lmm = scripted;
    Gateway gw(std::move(b), fast_policy());
    RefineLoop loop(gw, PromptTemplates::builtin(), small_loop_cfg());

    AugmentedIdea x = augment(text_idea("thing"), small_loop_cfg().render);
    NullSink sink;
    CHECK_THROWS_AS(loop.generate_prompts(x, std::nullopt, Memory{}, 3, 0, sink),
                    PromptParseError);
    CHECK(scripted->calls() == 3);
}

TEST_CASE("feedback presence must match the iteration") {
    Gateway gw(make_mock_backends(1), fast_policy());
    RefineLoop loop(gw, PromptTemplates::builtin(), small_loop_cfg());
    AugmentedIdea x = augment(text_idea("thing"), small_loop_cfg().render);
    NullSink sink;
    CHECK_THROWS_AS(loop.generate_prompts(x, std::string("feedback"), Memory{}, 3, 0, sink),
                    ValidationError);
    Memory mem;
    MemoryRecord r;
    r.iteration = 0;
    mem.append(r);
    CHECK_THROWS_AS(loop.generate_prompts(x, std::nullopt, mem, 3, 1, sink), ValidationError);
}

TEST_CASE("t23d composes the stage chain and reports failures as data") {
    Gateway gw(make_mock_backends(1), fast_policy());
    NullSink sink;
    RenderConfig render;
    render.width = 96;
    render.height = 96;

    T23dOutcome ok = run_t23d(gw, "red cube", render, 5, 0, "d0", sink);
    REQUIRE(ok.draft.has_value());
    CHECK(ok.draft->prompt == "red cube");
    CHECK(ok.draft->views.size() == 6);
    CHECK(ok.draft->mesh.geometry.triangle_count() > 0);
    CHECK(ok.draft->fg_image.image.width() == ok.draft->gen_image.image.width());

    // Uniform T2I output -> background removal keeps nothing -> discarded.
    GatewayBackends uniform = make_mock_backends(1);
    uniform.t2i = std::make_shared<FnT2iBackend>([](const std::string&, int, std::uint64_t) {
        return std::vector<Image>{Image(64, 64, {240, 240, 240, 255})};
    });
    Gateway gw2(std::move(uniform), fast_policy());
    T23dOutcome fail = run_t23d(gw2, "anything", render, 5, 0, "d1", sink);
    CHECK_FALSE(fail.draft.has_value());
    CHECK(fail.failure == "EmptyForeground");
}

TEST_CASE("select_best parses BEST and short-circuits single drafts") {
    LoopConfig cfg = small_loop_cfg();
    Gateway gw_mock(make_mock_backends(1), fast_policy());
    NullSink null;
    std::vector<DraftModel> drafts;
    for (int i = 0; i < 3; ++i) {
        T23dOutcome o = run_t23d(gw_mock, "cube " + std::to_string(i), cfg.render, i, 0,
                                 "d" + std::to_string(i), null);
        REQUIRE(o.draft.has_value());
        drafts.push_back(std::move(*o.draft));
    }
    AugmentedIdea x = augment(text_idea("cube"), cfg.render);

    GatewayBackends b = make_mock_backends(1);
    auto scripted =
        std::make_shared<ScriptedLmmBackend>(std::vector<std::string>{"BEST: 1"});
    b.lmm = scripted;
    Gateway gw(std::move(b), fast_policy());
    RefineLoop loop(gw, PromptTemplates::builtin(), cfg);
    BufferSink sink;
    CHECK(loop.select_best(drafts, x, sink) == 1);

    // Single draft: no LMM call at all.
    GatewayBackends b2 = make_mock_backends(1);
    auto counting = std::make_shared<ScriptedLmmBackend>(std::vector<std::string>{});
    b2.lmm = counting;
    Gateway gw2(std::move(b2), fast_policy());
    RefineLoop loop2(gw2, PromptTemplates::builtin(), cfg);
    std::vector<DraftModel> one = {drafts[0]};
    CHECK(loop2.select_best(one, x, sink) == 0);
    CHECK(counting->calls() == 0);
}

TEST_CASE("out-of-range BEST falls back to 0 with a logged event") {
    LoopConfig cfg = small_loop_cfg();
    Gateway gw_mock(make_mock_backends(1), fast_policy());
    NullSink null;
    std::vector<DraftModel> drafts;
    for (int i = 0; i < 3; ++i) {
        T23dOutcome o = run_t23d(gw_mock, "cube " + std::to_string(i), cfg.render, i, 0,
                                 "d" + std::to_string(i), null);
        drafts.push_back(std::move(*o.draft));
    }
    AugmentedIdea x = augment(text_idea("cube"), cfg.render);

    GatewayBackends b = make_mock_backends(1);
    auto scripted = std::make_shared<ScriptedLmmBackend>(
        std::vector<std::string>{"BEST: 7", "BEST: 7", "BEST: 7"});
    b.lmm = scripted;
    Gateway gw(std::move(b), fast_policy());
    RefineLoop loop(gw, PromptTemplates::builtin(), cfg);
    BufferSink sink;
    CHECK(loop.select_best(drafts, x, sink) == 0);
    CHECK(scripted->calls() == 3);  // initial + 2 re-asks
    bool fallback_logged = false;
    for (const auto& e : sink.events()) {
        if (e.value("type", "") == "selection_fallback") fallback_logged = true;
    }
    CHECK(fallback_logged);
}

TEST_CASE("decide_and_feedback honors the iteration cap and parses verdicts") {
    LoopConfig cfg = small_loop_cfg();
    Gateway gw_mock(make_mock_backends(1), fast_policy());
    NullSink null;
    T23dOutcome o = run_t23d(gw_mock, "cube", cfg.render, 1, 4, "d", null);
    REQUIRE(o.draft.has_value());
    AugmentedIdea x = augment(text_idea("cube"), cfg.render);

    // Cap rule: iter 4 of max 5 accepts without consulting the LMM.
    GatewayBackends b = make_mock_backends(1);
    auto counting = std::make_shared<ScriptedLmmBackend>(std::vector<std::string>{});
    b.lmm = counting;
    Gateway gw(std::move(b), fast_policy());
    RefineLoop loop(gw, PromptTemplates::builtin(), cfg);
    Decision d = loop.decide_and_feedback(*o.draft, x, Memory{}, 4, null);
    CHECK(d.accept);
    CHECK(counting->calls() == 0);

    GatewayBackends b2 = make_mock_backends(1);
    b2.lmm = std::make_shared<ScriptedLmmBackend>(
        std::vector<std::string>{"VERDICT: REFINE\nThe rabbit lacks the doughnut."});
    Gateway gw2(std::move(b2), fast_policy());
    RefineLoop loop2(gw2, PromptTemplates::builtin(), cfg);
    d = loop2.decide_and_feedback(*o.draft, x, Memory{}, 0, null);
    CHECK_FALSE(d.accept);
    CHECK(d.feedback == "The rabbit lacks the doughnut.");

    GatewayBackends b3 = make_mock_backends(1);
    b3.lmm =
        std::make_shared<ScriptedLmmBackend>(std::vector<std::string>{"VERDICT: ACCEPT"});
    Gateway gw3(std::move(b3), fast_policy());
    RefineLoop loop3(gw3, PromptTemplates::builtin(), cfg);
    d = loop3.decide_and_feedback(*o.draft, x, Memory{}, 0, null);
    CHECK(d.accept);

    // Garbage verdicts degrade to refine-with-raw-completion.
    GatewayBackends b4 = make_mock_backends(1);
    auto garbage = std::make_shared<ScriptedLmmBackend>(
        std::vector<std::string>{"hmm", "no verdict here", "still none"});
    b4.lmm = garbage;
    Gateway gw4(std::move(b4), fast_policy());
    RefineLoop loop4(gw4, PromptTemplates::builtin(), cfg);
    d = loop4.decide_and_feedback(*o.draft, x, Memory{}, 0, null);
    CHECK_FALSE(d.accept);
    CHECK(d.feedback == "still none");
    CHECK(garbage->calls() == 3);
}

TEST_CASE("run executes scripted accept-at-2 in exactly two iterations") {
    MockLmmConfig lmm_cfg;
    lmm_cfg.accept_at_iteration = 1;  // accept when one memory record exists
    Gateway gw(make_mock_backends(3, lmm_cfg), fast_policy());
    LoopConfig cfg = small_loop_cfg();
    RefineLoop loop(gw, PromptTemplates::builtin(), cfg);

    SessionLog session(temp_dir("accept2"));
    RunResult result = loop.run(text_idea("green dragon"), session);
    CHECK(result.outcomes.size() == 2);
    CHECK(result.memory.size() == 2);
    CHECK(result.outcomes.back().decision.accept);
    CHECK_FALSE(result.outcomes.front().decision.accept);
    CHECK(result.final_draft.iteration == 1);
    for (const IterationOutcome& o : result.outcomes) {
        CHECK(o.drafts.size() + o.discarded.size() ==
              static_cast<std::size_t>(cfg.num_draft * cfg.num_img));
        CHECK(o.best_index >= 0);
        CHECK(o.best_index < static_cast<int>(o.drafts.size()));
    }
}

TEST_CASE("never-accept scripts stop at the cap with a final accept") {
    MockLmmConfig lmm_cfg;
    lmm_cfg.force_refine = true;
    Gateway gw(make_mock_backends(3, lmm_cfg), fast_policy());
    LoopConfig cfg = small_loop_cfg();
    RefineLoop loop(gw, PromptTemplates::builtin(), cfg);

    SessionLog session(temp_dir("cap"));
    RunResult result = loop.run(text_idea("blue boat"), session);
    CHECK(result.outcomes.size() == static_cast<std::size_t>(cfg.max_iters));
    CHECK(result.outcomes.back().decision.accept);  // by cap
    CHECK(result.memory.size() == 5);
}

TEST_CASE("a failing prompt is discarded and the loop proceeds") {
    GatewayBackends b = make_mock_backends(4);
    MockLmmConfig lmm_cfg;
    lmm_cfg.accept_at_iteration = 0;
    lmm_cfg.seed = mix_seed(4, 0x11u);
    b.lmm = std::make_shared<MockLmmBackend>(lmm_cfg);
    // Prompt index 1 rotates to a poisoned prompt via scripted t2i.
    auto real_t2i = std::make_shared<MockT2iBackend>();
    b.t2i = std::make_shared<FnT2iBackend>(
        [real_t2i](const std::string& prompt, int n, std::uint64_t seed) {
            if (prompt.find("v2") != std::string::npos) {
                return std::vector<Image>{Image(64, 64, {240, 240, 240, 255})};  // uniform
            }
            return real_t2i->generate(prompt, n, seed);
        });
    Gateway gw(std::move(b), fast_policy());
    LoopConfig cfg = small_loop_cfg();
    RefineLoop loop(gw, PromptTemplates::builtin(), cfg);

    SessionLog session(temp_dir("discard"));
    RunResult result = loop.run(text_idea("silver robot"), session);
    REQUIRE(result.outcomes.size() == 1);
    CHECK(result.outcomes[0].drafts.size() == 2);
    CHECK(result.outcomes[0].discarded.size() == 1);
    CHECK(result.outcomes[0].discarded[0].reason == "EmptyForeground");
}

TEST_CASE("all prompts failing aborts with a complete session log") {
    GatewayBackends b = make_mock_backends(5);
    MockLmmConfig lmm_cfg;
    lmm_cfg.seed = mix_seed(5, 0x11u);
    b.lmm = std::make_shared<MockLmmBackend>(lmm_cfg);
    b.t2i = std::make_shared<FnT2iBackend>([](const std::string&, int, std::uint64_t) {
        return std::vector<Image>{Image(32, 32, {240, 240, 240, 255})};
    });
    Gateway gw(std::move(b), fast_policy());
    LoopConfig cfg = small_loop_cfg();
    RefineLoop loop(gw, PromptTemplates::builtin(), cfg);

    std::string dir = temp_dir("allfail");
    {
        SessionLog session(dir);
        CHECK_THROWS_AS(loop.run(text_idea("anything"), session), AllDraftsFailed);
    }
    LoadedSession loaded = load_session(dir);
    bool error_logged = false;
    for (const auto& e : loaded.events) {
        if (e.value("type", "") == "error") error_logged = true;
    }
    CHECK(error_logged);
    CHECK_FALSE(loaded.incomplete_final_event);
}

TEST_CASE("identical runs produce identical logs modulo timestamps") {
    auto normalize = [](const std::vector<json>& events) {
        std::string out;
        for (json e : events) {
            e.erase("ts");
            e.erase("latency_ms");
            out += e.dump() + "\n";
        }
        return out;
    };
    auto one_run = [&](const std::string& tag) {
        MockLmmConfig lmm_cfg;
        lmm_cfg.accept_at_iteration = 2;
        Gateway gw(make_mock_backends(9, lmm_cfg), fast_policy());
        LoopConfig cfg = small_loop_cfg();
        RefineLoop loop(gw, PromptTemplates::builtin(), cfg);
        Idea idea;
        idea.text_directives = {"a purple teapot"};
        idea.mesh_assets.push_back(fixtures::cube());
        SessionLog session(temp_dir(tag));
        loop.run(idea, session);
        return normalize(session.events());
    };
    CHECK(one_run("det_a") == one_run("det_b"));
}

TEST_CASE("lmm call counts per iteration match the stage structure") {
    MockLmmConfig lmm_cfg;
    lmm_cfg.force_refine = true;
    Gateway gw(make_mock_backends(13, lmm_cfg), fast_policy());
    LoopConfig cfg = small_loop_cfg();
    cfg.max_iters = 2;
    RefineLoop loop(gw, PromptTemplates::builtin(), cfg);

    SessionLog session(temp_dir("counts"));
    loop.run(text_idea("white owl"), session);
    // iter 0: gen + select + feedback; iter 1 (cap): gen + select.
    CHECK(count_lmm_calls(session.events()) == 5);
}

}  // TEST_SUITE
