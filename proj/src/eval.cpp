#include "idea23d/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <thread>

#include "idea23d/errors.hpp"
#include "idea23d/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace idea23d {

Idea EvalCaseSpec::load_idea() const {
    Idea idea;
    idea.text_directives = text;
    for (const auto& [id, path] : images) {
        ImageAsset a;
        a.id = id;
        a.image = load_png(path);
        a.source_path = path;
        idea.image_assets.push_back(std::move(a));
    }
    for (const auto& [id, path] : meshes) {
        idea.mesh_assets.push_back(load_mesh(path, id));
    }
    return idea;
}

EvalDataset load_dataset(const std::string& manifest_path) {
    json j;
    try {
        j = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw DatasetError("cannot parse dataset manifest " + manifest_path + ": " + e.what());
    }
    fs::path base = fs::path(manifest_path).parent_path();

    EvalDataset ds;
    std::set<std::string> ids;
    for (const json& c : j.value("cases", json::array())) {
        EvalCaseSpec spec;
        spec.id = c.at("id").get<std::string>();
        if (!ids.insert(spec.id).second) {
            throw DatasetError("duplicate case id " + spec.id);
        }
        for (const json& t : c.value("text", json::array())) {
            spec.text.push_back(t.get<std::string>());
        }
        spec.gt_caption = c.value("gt_caption", "");
        if (spec.gt_caption.empty()) {
            throw DatasetError("case " + spec.id + " has no gt_caption");
        }
        for (const json& t : c.value("tags", json::array())) {
            spec.tags.push_back(t.get<std::string>());
        }
        for (const json& e : c.value("images", json::array())) {
            std::string path = (base / e.at("path").get<std::string>()).string();
            if (!fs::exists(path)) {
                throw DatasetError(spec.id + ": missing image asset " + path);
            }
            spec.images.emplace_back(e.at("id").get<std::string>(), path);
        }
        for (const json& e : c.value("meshes", json::array())) {
            std::string path = (base / e.at("path").get<std::string>()).string();
            if (!fs::exists(path)) {
                throw DatasetError(spec.id + ": missing mesh asset " + path);
            }
            spec.meshes.emplace_back(e.at("id").get<std::string>(), path);
        }

        bool has_img = !spec.images.empty();
        bool has_mesh = !spec.meshes.empty();
        if (has_img && has_mesh) ++ds.modality.text_image_mesh;
        else if (has_mesh) ++ds.modality.text_mesh;
        else if (has_img) ++ds.modality.text_image;
        else ++ds.modality.text_only;
        ds.tag_histogram[static_cast<int>(spec.tags.size())] += 1;

        ds.cases.push_back(std::move(spec));
    }
    if (ds.cases.empty()) throw DatasetError("dataset has no cases: " + manifest_path);
    return ds;
}

const char* eval_mode_str(EvalMode m) {
    switch (m) {
        case EvalMode::idea23d: return "idea23d";
        case EvalMode::caption_baseline: return "caption_baseline";
        case EvalMode::text_only: return "text_only";
        case EvalMode::gt_prompt: return "gt_prompt";
    }
    return "?";
}

EvalMode eval_mode_from_str(const std::string& s) {
    for (EvalMode m : {EvalMode::idea23d, EvalMode::caption_baseline, EvalMode::text_only,
                       EvalMode::gt_prompt}) {
        if (s == eval_mode_str(m)) return m;
    }
    throw ConfigError("unknown eval mode: " + s);
}

namespace {

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) throw MetricError("embedding dimensions differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw MetricError("zero-norm embedding");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

double clip_multiview_score(const std::string& gt_caption, const MeshAsset& mesh, Gateway& gw,
                            const RenderConfig& cfg, EventSink& sink) {
    ViewSet views = cm2i(mesh, cfg);
    std::vector<float> text_emb = gw.embed_text(gt_caption, sink);
    double sum = 0.0;
    for (ViewName v : {ViewName::front, ViewName::back, ViewName::left, ViewName::right}) {
        std::vector<float> img_emb = gw.embed_image(views.view(v), sink);
        sum += cosine(text_emb, img_emb);
    }
    return sum / 4.0;
}

double mesh_text_score(const std::string& gt_caption, const MeshAsset& mesh, Gateway& gw,
                       EventSink& sink) {
    std::vector<float> text_emb = gw.embed_text(gt_caption, sink);
    std::vector<float> mesh_emb = gw.embed_mesh(mesh, sink);
    return cosine(text_emb, mesh_emb);
}

int EvalReport::scored() const {
    int n = 0;
    for (const EvalRow& r : rows) {
        if (r.clip_score) ++n;
    }
    return n;
}

int EvalReport::excluded() const { return static_cast<int>(rows.size()) - scored(); }

namespace {
std::optional<double> mean_of(const std::vector<EvalRow>& rows,
                              std::optional<double> EvalRow::*field) {
    double sum = 0.0;
    int n = 0;
    for (const EvalRow& r : rows) {
        if (r.*field) {
            sum += *(r.*field);
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}
}  // namespace

std::optional<double> EvalReport::mean_clip() const { return mean_of(rows, &EvalRow::clip_score); }
std::optional<double> EvalReport::mean_ulip() const { return mean_of(rows, &EvalRow::ulip_score); }

std::optional<double> EvalReport::mean_iterations() const {
    double sum = 0.0;
    int n = 0;
    for (const EvalRow& r : rows) {
        if (r.iterations) {
            sum += *r.iterations;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

json EvalReport::to_json() const {
    json rows_json = json::array();
    for (const EvalRow& r : rows) {
        json row{{"case_id", r.case_id}, {"mode", mode}};
        row["clip_score"] = r.clip_score ? json(*r.clip_score) : json();
        row["ulip_score"] = r.ulip_score ? json(*r.ulip_score) : json();
        row["iterations"] = r.iterations ? json(*r.iterations) : json();
        if (r.failure) row["failure"] = *r.failure;
        rows_json.push_back(std::move(row));
    }
    json agg{{"scored", scored()}, {"excluded", excluded()}};
    agg["clip_mean"] = mean_clip() ? json(*mean_clip()) : json();
    agg["ulip_mean"] = mean_ulip() ? json(*mean_ulip()) : json();
    agg["avg_iterations"] = mean_iterations() ? json(*mean_iterations()) : json();
    return json{{"mode", mode},
                {"text_embedding_source", text_embedding_source},
                {"config", config_echo},
                {"rows", rows_json},
                {"aggregate", agg}};
}

std::string EvalReport::to_table() const {
    char buf[256];
    std::string out;
    bool with_iters = mean_iterations().has_value();
    out += "mode: " + mode + " (scores against gt_caption)\n";
    std::snprintf(buf, sizeof(buf), "%-16s %10s %10s %10s\n", "case", "clip", "ulip",
                  with_iters ? "iters" : "");
    out += buf;
    auto fmt_score = [](const std::optional<double>& v) {
        char b[32];
        if (!v) return std::string("-");
        std::snprintf(b, sizeof(b), "%.4f", *v);
        return std::string(b);
    };
    for (const EvalRow& r : rows) {
        std::string iters = r.iterations ? std::to_string(*r.iterations) : "";
        std::snprintf(buf, sizeof(buf), "%-16s %10s %10s %10s\n", r.case_id.c_str(),
                      fmt_score(r.clip_score).c_str(), fmt_score(r.ulip_score).c_str(),
                      with_iters ? iters.c_str() : "");
        out += buf;
    }
    std::string avg_iters =
        mean_iterations() ? (std::to_string(*mean_iterations())) : std::string("");
    std::snprintf(buf, sizeof(buf), "%-16s %10s %10s %10s\n", "mean",
                  fmt_score(mean_clip()).c_str(), fmt_score(mean_ulip()).c_str(),
                  with_iters ? avg_iters.c_str() : "");
    out += buf;
    std::snprintf(buf, sizeof(buf), "scored %d of %zu cases (%d excluded)\n", scored(),
                  rows.size(), excluded());
    out += buf;
    return out;
}

namespace {

constexpr const char* kCaptionTemplate =
    "CAPTION the attached material as one text-to-image prompt for a single object on a\n"
    "plain background. Cover the directive text and everything the attachments show.\n"
    "IDEA:\n"
    "{idea_text}\n"
    "Reply with the prompt text only.\n";

// Evaluates one case; any Error is converted into a failure row.
EvalRow eval_case(const EvalCaseSpec& spec, Gateway& gw, const EvalOptions& opts) {
    EvalRow row;
    row.case_id = spec.id;

    std::string session_dir = (fs::path(opts.session_root) / spec.id).string();
    try {
        SessionLog session(session_dir);
        LoopConfig cfg = opts.loop;
        cfg.seed = mix_seed(opts.loop.seed, fnv1a64(spec.id));

        Idea idea = spec.load_idea();
        MeshAsset final_mesh;

        if (opts.mode == EvalMode::idea23d) {
            RefineLoop loop(gw, opts.templates, cfg);
            RunResult result = loop.run(idea, session);
            final_mesh = result.final_draft.mesh;
            row.iterations = static_cast<int>(result.outcomes.size());
        } else {
            std::string prompt;
            if (opts.mode == EvalMode::gt_prompt) {
                prompt = spec.gt_caption;
            } else if (opts.mode == EvalMode::text_only) {
                for (const std::string& t : idea.text_directives) {
                    if (!prompt.empty()) prompt += "\n";
                    prompt += t;
                }
            } else {  // caption_baseline: one captioning pass, then one T23D call
                AugmentedIdea x = augment(idea, cfg.render);
                LmmRequest req;
                req.system_prompt = instantiate_template(
                    kCaptionTemplate, {{"idea_text", augmented_idea_text(x)}});
                req.parts.push_back(LmmPart::make_text("caption request"));
                for (const ImageAsset& a : x.images) {
                    req.parts.push_back(LmmPart::make_image(a.image, a.id));
                }
                prompt = gw.lmm_complete(req, session);
            }
            if (prompt.empty()) throw ValidationError("empty prompt for case " + spec.id);

            T23dOutcome outcome = run_t23d(gw, prompt, cfg.render, cfg.seed, 0, "baseline",
                                           session);
            if (!outcome.draft) {
                throw AllDraftsFailed("baseline draft failed: " + outcome.failure);
            }
            final_mesh = outcome.draft->mesh;
        }

        row.clip_score =
            clip_multiview_score(spec.gt_caption, final_mesh, gw, cfg.render, session);
        row.ulip_score = mesh_text_score(spec.gt_caption, final_mesh, gw, session);
        session.append(json{{"type", "eval_case_end"},
                            {"case_id", spec.id},
                            {"clip_score", *row.clip_score},
                            {"ulip_score", *row.ulip_score}});
    } catch (const Error& e) {
        row.failure = std::string(e.stage()) + ": " + e.what();
    }
    return row;
}

}  // namespace

EvalReport run_eval(const EvalDataset& dataset, Gateway& gw, const EvalOptions& opts) {
    if (opts.session_root.empty()) throw ConfigError("eval requires a session_root");
    if (auto issue = opts.loop.validate()) throw ConfigError(*issue);
    fs::create_directories(opts.session_root);

    EvalReport report;
    report.mode = eval_mode_str(opts.mode);
    report.config_echo = json{{"num_draft", opts.loop.num_draft},
                              {"num_img", opts.loop.num_img},
                              {"max_iters", opts.loop.max_iters},
                              {"seed", opts.loop.seed},
                              {"render", {{"width", opts.loop.render.width},
                                          {"height", opts.loop.render.height},
                                          {"margin_fraction", opts.loop.render.margin_fraction}}},
                              {"workers", opts.workers},
                              {"cases", dataset.cases.size()}};
    report.rows.resize(dataset.cases.size());

    int workers = std::max(1, opts.workers);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= dataset.cases.size()) break;
                report.rows[i] = eval_case(dataset.cases[i], gw, opts);
            }
        });
    }
    for (std::thread& t : pool) t.join();
    return report;
}

}  // namespace idea23d
