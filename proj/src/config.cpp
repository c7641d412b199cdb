#include "idea23d/config.hpp"

#include <filesystem>

#include "idea23d/errors.hpp"
#include "idea23d/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace idea23d {

namespace {

BackendEntry parse_backend(const json& j, const std::string& role) {
    BackendEntry e;
    e.kind = j.value("kind", "mock");
    if (e.kind == "http") {
        if (!j.contains("url")) throw ConfigError(role + " backend: http kind requires url");
        e.http.url = j.at("url").get<std::string>();
        e.http.api_key_env = j.value("api_key_env", "");
        e.http.model_name = j.value("model_name", role);
        e.http.timeout_s = j.value("timeout_s", 120.0);
    } else if (e.kind != "mock") {
        throw ConfigError(role + " backend: unknown kind '" + e.kind + "'");
    }
    e.accept_at_iteration = j.value("accept_at_iteration", -1);
    e.force_refine = j.value("force_refine", false);
    return e;
}

}  // namespace

AppConfig AppConfig::from_json(const json& j, const std::string& base_dir) {
    AppConfig cfg;
    if (j.contains("backends")) {
        const json& b = j["backends"];
        if (b.contains("lmm")) cfg.lmm = parse_backend(b["lmm"], "lmm");
        if (b.contains("t2i")) cfg.t2i = parse_backend(b["t2i"], "t2i");
        if (b.contains("i23d")) cfg.i23d = parse_backend(b["i23d"], "i23d");
        if (b.contains("embed")) cfg.embed = parse_backend(b["embed"], "embed");
    }
    if (j.contains("policy")) {
        const json& p = j["policy"];
        cfg.policy.timeout_s = p.value("timeout_s", cfg.policy.timeout_s);
        cfg.policy.max_retries = p.value("max_retries", cfg.policy.max_retries);
        cfg.policy.backoff_base_s = p.value("backoff_base_s", cfg.policy.backoff_base_s);
        cfg.policy.parallel_limit = p.value("parallel_limit", cfg.policy.parallel_limit);
    }
    if (j.contains("loop")) {
        const json& l = j["loop"];
        cfg.loop.num_draft = l.value("num_draft", cfg.loop.num_draft);
        cfg.loop.num_img = l.value("num_img", cfg.loop.num_img);
        cfg.loop.max_iters = l.value("max_iters", cfg.loop.max_iters);
        cfg.loop.seed = l.value("seed", cfg.loop.seed);
        cfg.loop.memory_budget_chars =
            l.value("memory_budget_chars", cfg.loop.memory_budget_chars);
        if (l.contains("render")) {
            const json& r = l["render"];
            cfg.loop.render.width = r.value("width", cfg.loop.render.width);
            cfg.loop.render.height = r.value("height", cfg.loop.render.height);
            cfg.loop.render.margin_fraction =
                r.value("margin_fraction", cfg.loop.render.margin_fraction);
            cfg.loop.render.banner_px = r.value("banner_px", cfg.loop.render.banner_px);
        }
        if (l.contains("temperatures")) {
            const json& t = l["temperatures"];
            cfg.loop.temperatures.gen = t.value("gen", cfg.loop.temperatures.gen);
            cfg.loop.temperatures.select = t.value("select", cfg.loop.temperatures.select);
            cfg.loop.temperatures.feedback = t.value("feedback", cfg.loop.temperatures.feedback);
        }
    }
    if (j.contains("rembg")) {
        cfg.rembg.tolerance = j["rembg"].value("tolerance", cfg.rembg.tolerance);
        cfg.rembg.prematted_fraction =
            j["rembg"].value("prematted_fraction", cfg.rembg.prematted_fraction);
    }
    if (j.contains("templates") && j["templates"].contains("dir")) {
        fs::path dir = j["templates"]["dir"].get<std::string>();
        if (dir.is_relative()) dir = fs::path(base_dir) / dir;
        if (!fs::exists(dir)) throw ConfigError("templates dir does not exist: " + dir.string());
        cfg.templates_dir = dir.string();
    }
    if (j.contains("logging")) {
        cfg.log_level = j["logging"].value("level", cfg.log_level);
        cfg.session_root = j["logging"].value("session_root", cfg.session_root);
    }
    if (auto issue = cfg.policy.validate()) throw ConfigError(*issue);
    if (auto issue = cfg.loop.validate()) throw ConfigError(*issue);
    return cfg;
}

AppConfig AppConfig::load_file(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const IoError&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse config " + path + ": " + e.what());
    }
    return from_json(j, fs::path(path).parent_path().string());
}

GatewayBackends AppConfig::make_backends(std::uint64_t seed) const {
    GatewayBackends b;
    if (lmm.kind == "http") {
        b.lmm = std::make_shared<HttpLmmBackend>(lmm.http);
    } else {
        MockLmmConfig mc;
        mc.seed = mix_seed(seed, 0x11u);
        mc.accept_at_iteration = lmm.accept_at_iteration;
        mc.force_refine = lmm.force_refine;
        b.lmm = std::make_shared<MockLmmBackend>(mc);
    }
    b.t2i = t2i.kind == "http"
                ? std::shared_ptr<T2iBackend>(std::make_shared<HttpT2iBackend>(t2i.http))
                : std::make_shared<MockT2iBackend>();
    b.i23d = i23d.kind == "http"
                 ? std::shared_ptr<I23dBackend>(std::make_shared<HttpI23dBackend>(i23d.http))
                 : std::make_shared<MockI23dBackend>();
    if (embed.kind == "http") {
        b.embed = std::make_shared<HttpEmbedBackend>(embed.http);
    } else {
        MockEmbedConfig ec;
        ec.seed = mix_seed(seed, 0x22u);
        b.embed = std::make_shared<MockEmbedBackend>(ec);
    }
    return b;
}

PromptTemplates AppConfig::load_templates() const {
    if (templates_dir) return PromptTemplates::load_dir(*templates_dir);
    return PromptTemplates::builtin();
}

json AppConfig::echo() const {
    return json{{"backends",
                 {{"lmm", lmm.kind}, {"t2i", t2i.kind}, {"i23d", i23d.kind},
                  {"embed", embed.kind}}},
                {"policy",
                 {{"timeout_s", policy.timeout_s},
                  {"max_retries", policy.max_retries},
                  {"parallel_limit", policy.parallel_limit}}},
                {"loop",
                 {{"num_draft", loop.num_draft},
                  {"num_img", loop.num_img},
                  {"max_iters", loop.max_iters}}}};
}

}  // namespace idea23d
