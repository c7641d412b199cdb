#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "idea23d/backend.hpp"
#include "idea23d/loop.hpp"

namespace idea23d {

// One dataset entry; assets stay on disk until the case is evaluated.
struct EvalCaseSpec {
    std::string id;
    std::vector<std::string> text;
    std::vector<std::pair<std::string, std::string>> images;  // (id, absolute path)
    std::vector<std::pair<std::string, std::string>> meshes;
    std::string gt_caption;
    std::vector<std::string> tags;

    Idea load_idea() const;
};

struct ModalityHistogram {
    int text_only = 0;
    int text_image = 0;
    int text_mesh = 0;
    int text_image_mesh = 0;

    bool operator==(const ModalityHistogram&) const = default;
};

struct EvalDataset {
    std::vector<EvalCaseSpec> cases;
    ModalityHistogram modality;
    std::map<int, int> tag_histogram;  // tag count -> cases
};

// Validates ids, captions and asset file existence (a missing file raises
// DatasetError naming the case id) and computes the histograms.
EvalDataset load_dataset(const std::string& manifest_path);

enum class EvalMode { idea23d, caption_baseline, text_only, gt_prompt };
const char* eval_mode_str(EvalMode m);
EvalMode eval_mode_from_str(const std::string& s);

// Four-view render-and-compare metric: mean cosine between the caption
// embedding and the front/back/left/right view embeddings.
double clip_multiview_score(const std::string& gt_caption, const MeshAsset& mesh, Gateway& gw,
                            const RenderConfig& cfg, EventSink& sink);

// Cosine between the caption embedding and the mesh embedding.
double mesh_text_score(const std::string& gt_caption, const MeshAsset& mesh, Gateway& gw,
                       EventSink& sink);

struct EvalRow {
    std::string case_id;
    std::optional<double> clip_score;
    std::optional<double> ulip_score;
    std::optional<int> iterations;  // idea23d mode only
    std::optional<std::string> failure;
};

struct EvalReport {
    std::string mode;
    nlohmann::json config_echo;
    std::string text_embedding_source = "gt_caption";
    std::vector<EvalRow> rows;

    int scored() const;
    int excluded() const;
    std::optional<double> mean_clip() const;
    std::optional<double> mean_ulip() const;
    std::optional<double> mean_iterations() const;

    nlohmann::json to_json() const;
    std::string to_table() const;
};

struct EvalOptions {
    EvalMode mode = EvalMode::idea23d;
    LoopConfig loop;
    PromptTemplates templates = PromptTemplates::builtin();
    std::string session_root;  // one subdirectory per case
    int workers = 4;
};

EvalReport run_eval(const EvalDataset& dataset, Gateway& gw, const EvalOptions& opts);

}  // namespace idea23d
