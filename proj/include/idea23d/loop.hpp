#pragma once

#include <optional>
#include <string>
#include <vector>

#include "idea23d/backend.hpp"
#include "idea23d/idea.hpp"
#include "idea23d/memory.hpp"
#include "idea23d/render.hpp"
#include "idea23d/session.hpp"
#include "idea23d/templates.hpp"

namespace idea23d {

struct AgentTemperatures {
    double gen = 0.7;
    double select = 0.0;
    double feedback = 0.0;
};

struct LoopConfig {
    int num_draft = 3;  // prompts per round
    int num_img = 1;    // images per prompt
    int max_iters = 5;
    RenderConfig render;
    std::uint64_t seed = 0;
    AgentTemperatures temperatures;
    std::size_t memory_budget_chars = 2000;

    std::optional<std::string> validate() const;
};

struct Decision {
    bool accept = false;
    std::string feedback;  // non-empty iff refine
};

struct DiscardedDraft {
    std::string prompt;
    std::string reason;
};

struct IterationOutcome {
    int iteration = 0;
    std::vector<std::string> prompts;
    std::vector<DraftModel> drafts;  // survivors, ordered by (prompt, image) index
    int best_index = 0;
    Decision decision;
    std::vector<DiscardedDraft> discarded;
};

struct RunResult {
    DraftModel final_draft;
    std::vector<IterationOutcome> outcomes;
    Memory memory;
    std::string session_dir;
};

// Renders every mesh asset into six views and appends them after the
// original images, with provenance. Render failures abort (invalid input).
AugmentedIdea augment(const Idea& idea, const RenderConfig& cfg);

// Text directives joined by newlines with `<asset:ID>` references replaced
// by attachment positions (originals first, then rendered views; a mesh id
// resolves to its front view).
std::string augmented_idea_text(const AugmentedIdea& x);

struct T23dOutcome {
    std::optional<DraftModel> draft;
    std::string failure;  // set when draft is absent
};

// One full text-to-3D pipeline pass: T2I -> background removal -> I23D ->
// six-view render. Failures come back as data, not exceptions.
T23dOutcome run_t23d(Gateway& gw, const std::string& prompt, const RenderConfig& render,
                     std::uint64_t seed, int iteration, const std::string& draft_id,
                     EventSink& sink);

// The iteration state machine: prompt generation, N-way draft fan-out,
// best-draft selection, finalize-or-feedback, revised prompts, until
// acceptance or the iteration cap.
class RefineLoop {
public:
    RefineLoop(Gateway& gateway, PromptTemplates templates, LoopConfig cfg);

    // Exactly n distinct non-empty prompts. `feedback` must be absent iff
    // memory is empty (first iteration). Re-asks twice on unparseable
    // output, then throws PromptParseError; duplicate prompts trigger one
    // regeneration, then variation-hint padding.
    std::vector<std::string> generate_prompts(const AugmentedIdea& x,
                                              const std::optional<std::string>& feedback,
                                              const Memory& mem, int n, int iteration,
                                              EventSink& sink);

    // Single draft short-circuits to 0 without an LMM call. Unparseable or
    // out-of-range "BEST: <k>" answers are re-asked twice, then fall back to
    // 0 with a selection_fallback event.
    int select_best(const std::vector<DraftModel>& drafts, const AugmentedIdea& x,
                    EventSink& sink);

    // Accepts unconditionally once iter + 1 >= max_iters. Otherwise parses
    // "VERDICT: ACCEPT" / "VERDICT: REFINE\n<feedback>"; after two failed
    // re-asks the raw completion becomes the feedback (keep iterating).
    Decision decide_and_feedback(const DraftModel& best, const AugmentedIdea& x,
                                 const Memory& mem, int iter, EventSink& sink);

    RunResult run(const Idea& idea, SessionLog& session);

    const LoopConfig& config() const { return cfg_; }

private:
    Gateway& gw_;
    PromptTemplates templates_;
    LoopConfig cfg_;
};

}  // namespace idea23d
