#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>

#include "idea23d/config.hpp"
#include "idea23d/errors.hpp"
#include "idea23d/eval.hpp"
#include "idea23d/loop.hpp"
#include "idea23d/render.hpp"
#include "idea23d/session.hpp"
#include "idea23d/util.hpp"

namespace fs = std::filesystem;
using namespace idea23d;

namespace {

constexpr const char* kDefaultConfigPath = "./idea23d.json";

struct GlobalArgs {
    std::string config_path = kDefaultConfigPath;
    std::optional<std::uint64_t> seed;
    std::string log_level;
};

AppConfig load_config(const GlobalArgs& g) {
    if (!fs::exists(g.config_path)) {
        if (g.config_path == kDefaultConfigPath) return AppConfig{};
        throw IoError("config file not found: " + g.config_path);
    }
    return AppConfig::load_file(g.config_path);
}

std::uint64_t resolve_seed(const GlobalArgs& g, const AppConfig& cfg) {
    if (g.seed) return *g.seed;
    if (cfg.loop.seed != 0) return cfg.loop.seed;
    std::random_device rd;
    std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) | rd();
    std::cout << "seed: " << s << " (picked randomly; pass --seed to reproduce)\n";
    return s;
}

void write_final_artifacts(const RunResult& result, const fs::path& out_dir, int banner_px) {
    fs::path final_dir = out_dir / "final";
    fs::create_directories(final_dir / "views");
    save_glb(result.final_draft.mesh, (final_dir / "model.glb").string());
    save_obj(result.final_draft.mesh, (final_dir / "model.obj").string());
    for (const ImageAsset& v : result.final_draft.views) {
        auto colon = v.id.find_last_of(':');
        std::string name = colon == std::string::npos ? v.id : v.id.substr(colon + 1);
        save_png(v.image, (final_dir / "views" / (name + ".png")).string());
    }
    ViewSet views = ViewSet::from_assets(result.final_draft.mesh.id, result.final_draft.views);
    ImageAsset grid = compose_view_grid(views, banner_px);
    save_png(grid.image, (final_dir / "grid.png").string());
}

int cmd_run(const GlobalArgs& g, const std::string& idea_path, const std::string& out_dir) {
    AppConfig cfg = load_config(g);
    if (!fs::exists(idea_path)) throw IoError("idea manifest not found: " + idea_path);

    std::uint64_t seed = resolve_seed(g, cfg);
    LoopConfig loop_cfg = cfg.loop;
    loop_cfg.seed = seed;

    Idea idea = load_idea_manifest(idea_path);
    Gateway gw(cfg.make_backends(seed), cfg.policy, cfg.rembg);
    RefineLoop loop(gw, cfg.load_templates(), loop_cfg);

    SessionLog session(out_dir);
    RunResult result = loop.run(idea, session);
    write_final_artifacts(result, out_dir, loop_cfg.render.banner_px);

    std::cout << "accepted after " << result.outcomes.size() << " iteration(s)\n"
              << "final prompt: " << result.final_draft.prompt << "\n"
              << "model: " << (fs::path(out_dir) / "final" / "model.glb").string() << "\n"
              << "session log: " << (fs::path(out_dir) / "session.jsonl").string() << "\n";
    return 0;
}

int cmd_eval(const GlobalArgs& g, const std::string& dataset_path, const std::string& mode_str,
             const std::string& report_path, std::string sessions_dir, int workers) {
    AppConfig cfg = load_config(g);
    if (!fs::exists(dataset_path)) throw IoError("dataset manifest not found: " + dataset_path);

    std::uint64_t seed = resolve_seed(g, cfg);
    EvalOptions opts;
    opts.mode = eval_mode_from_str(mode_str);
    opts.loop = cfg.loop;
    opts.loop.seed = seed;
    opts.templates = cfg.load_templates();
    if (sessions_dir.empty()) sessions_dir = report_path + ".sessions";
    opts.session_root = sessions_dir;
    opts.workers = workers;

    EvalDataset dataset = load_dataset(dataset_path);
    std::cout << "dataset: " << dataset.cases.size() << " cases (text-only "
              << dataset.modality.text_only << ", text+image " << dataset.modality.text_image
              << ", text+mesh " << dataset.modality.text_mesh << ", text+image+mesh "
              << dataset.modality.text_image_mesh << ")\n";

    Gateway gw(cfg.make_backends(seed), cfg.policy, cfg.rembg);
    EvalReport report = run_eval(dataset, gw, opts);

    fs::path rp(report_path);
    if (rp.has_parent_path()) fs::create_directories(rp.parent_path());
    write_file(report_path, report.to_json().dump(2) + "\n");
    std::cout << report.to_table();
    std::cout << "report: " << report_path << "\n";
    return 0;
}

int cmd_render(const std::string& mesh_path, const std::string& out_dir, int width, int height,
               double margin) {
    if (!fs::exists(mesh_path)) throw IoError("mesh file not found: " + mesh_path);
    MeshAsset mesh = load_mesh(mesh_path);

    RenderConfig cfg;
    cfg.width = width;
    cfg.height = height;
    cfg.margin_fraction = margin;

    std::vector<std::string> warnings;
    ViewSet views = cm2i(mesh, cfg, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

    fs::create_directories(out_dir);
    for (ViewName v : kViewOrder) {
        save_png(views.view(v).image,
                 (fs::path(out_dir) / (std::string(view_name_str(v)) + ".png")).string());
    }
    ImageAsset grid = compose_view_grid(views, cfg.banner_px);
    save_png(grid.image, (fs::path(out_dir) / "grid.png").string());
    std::cout << "wrote 6 views and grid.png to " << out_dir << "\n";
    return 0;
}

int cmd_inspect(const std::string& session_dir) {
    LoadedSession session = load_session(session_dir);
    if (session.incomplete_final_event) {
        std::cout << "note: final event truncated (incomplete write)\n";
    }
    std::printf("%-5s %-6s %-5s %-9s %s\n", "iter", "drafts", "best", "decision", "feedback");
    for (const auto& e : session.events) {
        if (e.value("type", "") != "iteration") continue;
        std::string feedback = e.value("feedback", "");
        if (feedback.size() > 60) feedback = feedback.substr(0, 57) + "...";
        std::replace(feedback.begin(), feedback.end(), '\n', ' ');
        std::printf("%-5d %-6d %-5d %-9s %s\n", e.value("iteration", -1),
                    static_cast<int>(e.value("n_drafts", 0)), e.value("best_index", -1),
                    e.value("decision", "?").c_str(), feedback.c_str());
        for (const auto& p : e.value("prompts", nlohmann::json::array())) {
            std::cout << "      prompt: " << p.get<std::string>() << "\n";
        }
    }
    std::cout << "memory records: " << session.memory.size() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"idea23d: turn a multimodal idea (text + images + meshes) into a textured 3D "
                 "model through an iterative prompt-refinement loop"};
    app.require_subcommand(1);
    app.fallthrough(true);  // global flags may follow the subcommand

    GlobalArgs g;
    app.add_option("--config", g.config_path, "config file (JSON)")
        ->capture_default_str();
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "seed for all randomness");
    app.add_option("--log-level", g.log_level, "debug|info|warn|error");

    auto* run = app.add_subcommand("run", "run the full refinement loop on one idea");
    std::string idea_path, out_dir = "out";
    run->add_option("--idea", idea_path, "idea manifest (JSON)")->required();
    run->add_option("--out", out_dir, "output/session directory")->capture_default_str();

    auto* eval = app.add_subcommand("eval", "evaluate a dataset manifest");
    std::string dataset_path, mode = "idea23d", report_path = "report.json", sessions_dir;
    int workers = 4;
    eval->add_option("--dataset", dataset_path, "dataset manifest (JSON)")->required();
    eval->add_option("--mode", mode, "idea23d|caption_baseline|text_only|gt_prompt")
        ->capture_default_str();
    eval->add_option("--report", report_path, "report output path (JSON)")
        ->capture_default_str();
    eval->add_option("--sessions", sessions_dir, "session root (default <report>.sessions)");
    eval->add_option("--workers", workers, "concurrent cases")->capture_default_str();

    auto* render = app.add_subcommand("render", "render a mesh into six views and a grid");
    std::string mesh_path, render_out = "render-out";
    int width = 512, height = 512;
    double margin = 0.05;
    render->add_option("mesh", mesh_path, "mesh file (.obj or .glb)")->required();
    render->add_option("--out-dir", render_out, "output directory")->capture_default_str();
    render->add_option("--width", width, "view width")->capture_default_str();
    render->add_option("--height", height, "view height")->capture_default_str();
    render->add_option("--margin", margin, "margin fraction")->capture_default_str();

    auto* inspect = app.add_subcommand("inspect", "print the iteration table of a session");
    std::string session_dir;
    inspect->add_option("session", session_dir, "session directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (seed_opt->count() > 0) g.seed = seed_value;

    try {
        if (run->parsed()) return cmd_run(g, idea_path, out_dir);
        if (eval->parsed()) {
            return cmd_eval(g, dataset_path, mode, report_path, sessions_dir, workers);
        }
        if (render->parsed()) return cmd_render(mesh_path, render_out, width, height, margin);
        if (inspect->parsed()) return cmd_inspect(session_dir);
    } catch (const IoError& e) {
        std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
