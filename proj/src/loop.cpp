#include "idea23d/loop.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "idea23d/errors.hpp"
#include "idea23d/util.hpp"

using json = nlohmann::json;

namespace idea23d {

std::optional<std::string> LoopConfig::validate() const {
    if (num_draft < 1) return "num_draft must be >= 1";
    if (num_img < 1) return "num_img must be >= 1";
    if (max_iters < 1) return "max_iters must be >= 1";
    if (memory_budget_chars < 256) return "memory_budget_chars must be >= 256";
    return render.validate();
}

AugmentedIdea augment(const Idea& idea, const RenderConfig& cfg) {
    auto violations = validate_idea(idea);
    if (!violations.empty()) throw ValidationError("invalid idea: " + violations.front());

    AugmentedIdea x;
    x.text_directives = idea.text_directives;
    x.images = idea.image_assets;
    for (const MeshAsset& mesh : idea.mesh_assets) {
        ViewSet views = cm2i(mesh, cfg);
        for (const ImageAsset& v : views.to_assets()) {
            auto colon = v.id.find_last_of(':');
            x.view_provenance[v.id] = ViewProvenance{mesh.id, v.id.substr(colon + 1)};
            x.images.push_back(v);
        }
    }
    return x;
}

std::string augmented_idea_text(const AugmentedIdea& x) {
    // Attachment positions are 1-based over x.images; a bare mesh id aliases
    // its front view.
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < x.images.size(); ++i) {
        position.emplace(x.images[i].id, i + 1);
        auto it = x.view_provenance.find(x.images[i].id);
        if (it != x.view_provenance.end() && it->second.view_name == "front") {
            position.emplace(it->second.mesh_id, i + 1);
        }
    }
    std::string joined;
    for (const std::string& t : x.text_directives) {
        std::string line = t;
        for (const auto& [id, pos] : position) {
            std::string needle = "<asset:" + id + ">";
            std::size_t p;
            while ((p = line.find(needle)) != std::string::npos) {
                line.replace(p, needle.size(), "[attachment " + std::to_string(pos) + "]");
            }
        }
        if (!joined.empty()) joined += "\n";
        joined += line;
    }
    return joined;
}

T23dOutcome run_t23d(Gateway& gw, const std::string& prompt, const RenderConfig& render,
                     std::uint64_t seed, int iteration, const std::string& draft_id,
                     EventSink& sink) {
    T23dOutcome out;
    try {
        std::vector<ImageAsset> images = gw.t2i_generate(prompt, 1, seed, sink);
        ImageAsset fg = gw.remove_background(images[0], sink);
        MeshAsset mesh = gw.i23d_generate(fg, mix_seed(seed, 0x33u), sink);
        ViewSet views = cm2i(mesh, render);

        DraftModel draft;
        draft.draft_id = draft_id;
        draft.prompt = prompt;
        draft.gen_image = std::move(images[0]);
        draft.fg_image = std::move(fg);
        draft.mesh = std::move(mesh);
        draft.views = views.to_assets();
        draft.iteration = iteration;
        out.draft = std::move(draft);
    } catch (const EmptyForeground&) {
        out.failure = "EmptyForeground";
    } catch (const Error& e) {
        out.failure = std::string(e.stage()) + ": " + e.what();
    }
    return out;
}

RefineLoop::RefineLoop(Gateway& gateway, PromptTemplates templates, LoopConfig cfg)
    : gw_(gateway), templates_(std::move(templates)), cfg_(cfg) {
    templates_.validate();
    if (auto issue = cfg_.validate()) throw ConfigError(*issue);
}

namespace {

std::vector<LmmPart> image_parts(const AugmentedIdea& x) {
    std::vector<LmmPart> parts;
    for (const ImageAsset& a : x.images) {
        parts.push_back(LmmPart::make_image(a.image, a.id));
    }
    return parts;
}

// Parses "1. ..." lines; returns exactly n prompts or nullopt.
std::optional<std::vector<std::string>> parse_numbered(const std::string& completion, int n) {
    std::map<int, std::string> lines;
    std::istringstream ss(completion);
    std::string line;
    while (std::getline(ss, line)) {
        std::size_t i = line.find_first_not_of(" \t");
        if (i == std::string::npos) continue;
        std::size_t d = i;
        while (d < line.size() && isdigit(static_cast<unsigned char>(line[d]))) ++d;
        if (d == i || d >= line.size() || (line[d] != '.' && line[d] != ')')) continue;
        int num = std::stoi(line.substr(i, d - i));
        std::size_t start = line.find_first_not_of(" \t", d + 1);
        if (start == std::string::npos) continue;
        std::size_t end = line.find_last_not_of(" \t\r");
        std::string text = line.substr(start, end - start + 1);
        if (!text.empty()) lines.emplace(num, text);
    }
    std::vector<std::string> out;
    for (int k = 1; k <= n; ++k) {
        auto it = lines.find(k);
        if (it == lines.end()) return std::nullopt;
        out.push_back(it->second);
    }
    return out;
}

bool has_duplicates(const std::vector<std::string>& prompts) {
    std::set<std::string> seen(prompts.begin(), prompts.end());
    return seen.size() != prompts.size();
}

void pad_duplicates(std::vector<std::string>& prompts) {
    static const std::vector<std::string> kHints = {
        "alternative composition", "different style", "another viewpoint", "varied materials"};
    std::map<std::string, int> seen;
    for (std::string& p : prompts) {
        int n = seen[p]++;
        if (n > 0) {
            p += " (" + kHints[(n - 1) % kHints.size()] + ")";
        }
    }
}

std::string first_verdict_line(const std::string& completion, std::string* rest) {
    std::istringstream ss(completion);
    std::string line;
    std::string tail;
    bool found = false;
    std::string verdict;
    while (std::getline(ss, line)) {
        if (!found) {
            std::size_t p = line.find("VERDICT:");
            if (p != std::string::npos) {
                verdict = line.substr(p + 8);
                std::size_t s = verdict.find_first_not_of(" \t");
                verdict = s == std::string::npos ? "" : verdict.substr(s);
                std::size_t e = verdict.find_last_not_of(" \t\r");
                if (e != std::string::npos) verdict = verdict.substr(0, e + 1);
                found = true;
                continue;
            }
        } else {
            if (!tail.empty()) tail += "\n";
            tail += line;
        }
    }
    if (rest) {
        std::size_t s = tail.find_first_not_of(" \t\n");
        std::size_t e = tail.find_last_not_of(" \t\n\r");
        *rest = s == std::string::npos ? "" : tail.substr(s, e - s + 1);
    }
    return found ? verdict : "";
}

}  // namespace

std::vector<std::string> RefineLoop::generate_prompts(const AugmentedIdea& x,
                                                      const std::optional<std::string>& feedback,
                                                      const Memory& mem, int n, int iteration,
                                                      EventSink& sink) {
    if (n < 1) throw ValidationError("prompt count must be >= 1");
    if (feedback.has_value() == mem.empty()) {
        throw ValidationError(feedback ? "feedback supplied on the first iteration"
                                       : "feedback missing on a refinement iteration");
    }

    LmmRequest req;
    req.temperature = cfg_.temperatures.gen;
    req.system_prompt = instantiate_template(
        templates_.gen,
        {{"idea_text", augmented_idea_text(x)},
         {"feedback", feedback ? *feedback : "(none)"},
         {"memory_digest", mem.empty() ? "(empty)" : mem.digest(cfg_.memory_budget_chars)},
         {"n", std::to_string(n)}});
    req.parts.push_back(LmmPart::make_text("iteration: " + std::to_string(iteration)));
    for (LmmPart& p : image_parts(x)) req.parts.push_back(std::move(p));

    std::optional<std::vector<std::string>> parsed;
    for (int attempt = 0; attempt < 3; ++attempt) {
        std::string completion = gw_.lmm_complete(req, sink);
        parsed = parse_numbered(completion, n);
        if (parsed) break;
    }
    if (!parsed) {
        throw PromptParseError("no usable numbered prompt list after 2 re-asks");
    }

    if (has_duplicates(*parsed)) {
        // One regeneration, then pad whatever still collides.
        std::string completion = gw_.lmm_complete(req, sink);
        auto retry = parse_numbered(completion, n);
        if (retry) parsed = retry;
        if (has_duplicates(*parsed)) pad_duplicates(*parsed);
    }
    return *parsed;
}

int RefineLoop::select_best(const std::vector<DraftModel>& drafts, const AugmentedIdea& x,
                            EventSink& sink) {
    if (drafts.empty()) throw ValidationError("select_best needs at least one draft");
    int iteration = drafts[0].iteration;
    if (drafts.size() == 1) {
        sink.append(json{{"type", "selection"},
                         {"iteration", iteration},
                         {"n_drafts", 1},
                         {"best_index", 0},
                         {"fallback", false},
                         {"short_circuit", true}});
        return 0;
    }

    ImageAsset lineup = compose_draft_lineup(drafts, cfg_.render.banner_px);

    LmmRequest req;
    req.temperature = cfg_.temperatures.select;
    req.system_prompt = instantiate_template(
        templates_.select, {{"idea_text", augmented_idea_text(x)},
                            {"n", std::to_string(drafts.size())}});
    for (LmmPart& p : image_parts(x)) req.parts.push_back(std::move(p));
    req.parts.push_back(LmmPart::make_image(lineup.image, lineup.id));

    int best = -1;
    for (int attempt = 0; attempt < 3 && best < 0; ++attempt) {
        std::string completion = gw_.lmm_complete(req, sink);
        std::size_t p = completion.find("BEST:");
        if (p == std::string::npos) continue;
        p += 5;
        while (p < completion.size() && completion[p] == ' ') ++p;
        std::size_t d = p;
        while (d < completion.size() && isdigit(static_cast<unsigned char>(completion[d]))) ++d;
        if (d == p) continue;
        int k = std::stoi(completion.substr(p, d - p));
        if (k >= 0 && k < static_cast<int>(drafts.size())) best = k;
    }

    bool fallback = best < 0;
    if (fallback) {
        best = 0;
        sink.append(json{{"type", "selection_fallback"}, {"iteration", iteration}});
    }
    sink.append(json{{"type", "selection"},
                     {"iteration", iteration},
                     {"n_drafts", drafts.size()},
                     {"best_index", best},
                     {"fallback", fallback},
                     {"lineup_digest", lineup.image.content_digest()}});
    return best;
}

Decision RefineLoop::decide_and_feedback(const DraftModel& best, const AugmentedIdea& x,
                                         const Memory& mem, int iter, EventSink& sink) {
    if (iter + 1 >= cfg_.max_iters) {
        return Decision{true, ""};  // iteration cap
    }

    ViewSet views = ViewSet::from_assets(best.mesh.id, best.views);
    ImageAsset grid = compose_view_grid(views, cfg_.render.banner_px);

    LmmRequest req;
    req.temperature = cfg_.temperatures.feedback;
    req.system_prompt = instantiate_template(
        templates_.feedback,
        {{"idea_text", augmented_idea_text(x)},
         {"memory_digest", mem.empty() ? "(empty)" : mem.digest(cfg_.memory_budget_chars)}});
    req.parts.push_back(LmmPart::make_text("iteration: " + std::to_string(iter)));
    for (LmmPart& p : image_parts(x)) req.parts.push_back(std::move(p));
    req.parts.push_back(LmmPart::make_image(grid.image, grid.id));

    std::string last_completion;
    for (int attempt = 0; attempt < 3; ++attempt) {
        last_completion = gw_.lmm_complete(req, sink);
        std::string feedback_text;
        std::string verdict = first_verdict_line(last_completion, &feedback_text);
        if (verdict.rfind("ACCEPT", 0) == 0) return Decision{true, ""};
        if (verdict.rfind("REFINE", 0) == 0 && !feedback_text.empty()) {
            return Decision{false, feedback_text};
        }
    }
    // Conservative: keep iterating with the raw completion as feedback.
    return Decision{false, last_completion};
}

RunResult RefineLoop::run(const Idea& idea, SessionLog& session) {
    auto violations = validate_idea(idea);
    if (!violations.empty()) throw ValidationError("invalid idea: " + violations.front());

    session.append(json{{"type", "run_start"},
                        {"seed", cfg_.seed},
                        {"num_draft", cfg_.num_draft},
                        {"num_img", cfg_.num_img},
                        {"max_iters", cfg_.max_iters},
                        {"render", {{"width", cfg_.render.width},
                                    {"height", cfg_.render.height},
                                    {"margin_fraction", cfg_.render.margin_fraction}}}});

    AugmentedIdea x;
    try {
        x = augment(idea, cfg_.render);
    } catch (const Error& e) {
        session.append(json{{"type", "error"}, {"stage", e.stage()}, {"message", e.what()}});
        throw;
    }

    RunResult result;
    Memory& mem = result.memory;
    std::optional<std::string> feedback;

    try {
        for (int iter = 0; iter < cfg_.max_iters; ++iter) {
            std::vector<std::string> prompts =
                generate_prompts(x, feedback, mem, cfg_.num_draft, iter, session);

            // Fan out num_draft t23d pipelines; each buffers its events so
            // the session log order is independent of scheduling.
            struct Job {
                BufferSink sink;
                std::vector<T23dOutcome> outcomes;  // one per image
            };
            std::vector<Job> jobs(prompts.size());
            std::vector<std::thread> threads;
            threads.reserve(prompts.size());
            for (std::size_t p = 0; p < prompts.size(); ++p) {
                threads.emplace_back([&, p] {
                    std::uint64_t prompt_seed =
                        mix_seed(mix_seed(cfg_.seed, static_cast<std::uint64_t>(iter)),
                                 static_cast<std::uint64_t>(p));
                    for (int g = 0; g < cfg_.num_img; ++g) {
                        std::string draft_id = "it" + std::to_string(iter) + "-p" +
                                               std::to_string(p) + "-g" + std::to_string(g);
                        jobs[p].outcomes.push_back(
                            run_t23d(gw_, prompts[p], cfg_.render,
                                     mix_seed(prompt_seed, static_cast<std::uint64_t>(g)), iter,
                                     draft_id, jobs[p].sink));
                    }
                });
            }
            for (std::thread& t : threads) t.join();

            IterationOutcome outcome;
            outcome.iteration = iter;
            outcome.prompts = prompts;
            for (std::size_t p = 0; p < jobs.size(); ++p) {
                jobs[p].sink.flush_to(session);
                for (std::size_t g = 0; g < jobs[p].outcomes.size(); ++g) {
                    T23dOutcome& o = jobs[p].outcomes[g];
                    if (o.draft) {
                        session.append(json{{"type", "draft"},
                                            {"iteration", iter},
                                            {"prompt_index", p},
                                            {"image_index", g},
                                            {"status", "ok"},
                                            {"draft_id", o.draft->draft_id},
                                            {"mesh_digest", mesh_content_digest(o.draft->mesh)}});
                        outcome.drafts.push_back(std::move(*o.draft));
                    } else {
                        session.append(json{{"type", "draft"},
                                            {"iteration", iter},
                                            {"prompt_index", p},
                                            {"image_index", g},
                                            {"status", "failed"},
                                            {"reason", o.failure}});
                        outcome.discarded.push_back(DiscardedDraft{prompts[p], o.failure});
                    }
                }
            }

            if (outcome.drafts.empty()) {
                session.append(json{{"type", "error"},
                                    {"stage", "draft-fanout"},
                                    {"message", "all drafts failed in iteration " +
                                                    std::to_string(iter)}});
                throw AllDraftsFailed("all " + std::to_string(cfg_.num_draft * cfg_.num_img) +
                                      " drafts failed in iteration " + std::to_string(iter));
            }

            for (std::size_t slot = 0; slot < outcome.drafts.size(); ++slot) {
                store_draft_artifacts(session.dir().string(), outcome.drafts[slot],
                                      static_cast<int>(slot));
            }

            outcome.best_index = select_best(outcome.drafts, x, session);
            outcome.decision =
                decide_and_feedback(outcome.drafts[outcome.best_index], x, mem, iter, session);

            const DraftModel& best = outcome.drafts[outcome.best_index];
            session.append(json{{"type", "iteration"},
                                {"iteration", iter},
                                {"prompts", prompts},
                                {"n_drafts", outcome.drafts.size()},
                                {"n_discarded", outcome.discarded.size()},
                                {"best_index", outcome.best_index},
                                {"decision", outcome.decision.accept ? "accept" : "refine"},
                                {"feedback", outcome.decision.feedback},
                                {"best_draft_id", best.draft_id}});

            MemoryRecord record;
            record.iteration = iter;
            record.best_prompt = best.prompt;
            record.best_draft_ref = DraftRef{best.draft_id, mesh_content_digest(best.mesh)};
            record.feedback = outcome.decision.accept ? "" : outcome.decision.feedback;
            mem.append(std::move(record));
            session.write_memory(mem);

            bool accepted = outcome.decision.accept;
            feedback = outcome.decision.feedback;
            result.outcomes.push_back(std::move(outcome));
            if (accepted) break;
        }
    } catch (const Error& e) {
        session.append(json{{"type", "error"}, {"stage", e.stage()}, {"message", e.what()}});
        throw;
    }

    const IterationOutcome& last = result.outcomes.back();
    result.final_draft = last.drafts[last.best_index];
    result.session_dir = session.dir().string();
    session.append(json{{"type", "run_end"},
                        {"iterations", result.outcomes.size()},
                        {"final_draft_id", result.final_draft.draft_id}});
    return result;
}

}  // namespace idea23d
