#include "idea23d/templates.hpp"

#include <filesystem>
#include <vector>

#include "idea23d/errors.hpp"
#include "idea23d/util.hpp"

namespace fs = std::filesystem;

namespace idea23d {

namespace {

constexpr const char* kGenTemplate =
    "You write one-line prompts for a text-to-image model feeding an image-to-3d pipeline.\n"
    "The target is a single object on a plain background that realizes the idea below.\n"
    "When FEEDBACK is (none) this is the first round; otherwise revise the remembered\n"
    "prompts so the listed problems are addressed.\n"
    "IDEA:\n"
    "{idea_text}\n"
    "FEEDBACK:\n"
    "{feedback}\n"
    "MEMORY:\n"
    "{memory_digest}\n"
    "Write {n} candidate prompts as a numbered list (\"1.\" to \"{n}.\"), one prompt per "
    "line, nothing else.\n";

constexpr const char* kSelectTemplate =
    "You compare {n} draft candidates against the idea below. The attached lineup image\n"
    "shows each draft's six labeled views under an index banner.\n"
    "IDEA:\n"
    "{idea_text}\n"
    "Pick the draft whose shape, texture and content best realize the idea.\n"
    "Reply with exactly one line \"BEST: <index>\" using the 0-based draft index.\n";

constexpr const char* kFeedbackTemplate =
    "You critique the selected draft against the idea below. The last attached image\n"
    "shows the draft's six labeled views; any earlier attachments belong to the idea.\n"
    "IDEA:\n"
    "{idea_text}\n"
    "MEMORY:\n"
    "{memory_digest}\n"
    "If the draft already satisfies the idea, reply with \"VERDICT: ACCEPT\".\n"
    "Otherwise reply \"VERDICT: REFINE\" on the first line, then feedback naming what is\n"
    "missing or wrong (shape, parts, colors, arrangement).\n";

void require_slots(const std::string& tmpl, const std::vector<const char*>& slots,
                   const std::string& which) {
    for (const char* slot : slots) {
        if (tmpl.find(std::string("{") + slot + "}") == std::string::npos) {
            throw ConfigError(which + " template is missing slot {" + slot + "}");
        }
    }
}

}  // namespace

PromptTemplates PromptTemplates::builtin() {
    PromptTemplates t;
    t.gen = kGenTemplate;
    t.select = kSelectTemplate;
    t.feedback = kFeedbackTemplate;
    return t;
}

PromptTemplates PromptTemplates::load_dir(const std::string& dir) {
    PromptTemplates t;
    t.gen = read_file((fs::path(dir) / "gen.txt").string());
    t.select = read_file((fs::path(dir) / "select.txt").string());
    t.feedback = read_file((fs::path(dir) / "feedback.txt").string());
    t.validate();
    return t;
}

void PromptTemplates::validate() const {
    require_slots(gen, {"idea_text", "feedback", "memory_digest", "n"}, "gen");
    require_slots(select, {"idea_text", "n"}, "select");
    require_slots(feedback, {"idea_text", "memory_digest"}, "feedback");
}

std::string instantiate_template(const std::string& tmpl,
                                 const std::map<std::string, std::string>& slots) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        std::size_t open = tmpl.find('{', pos);
        if (open == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            break;
        }
        std::size_t close = tmpl.find('}', open);
        if (close == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            break;
        }
        out.append(tmpl, pos, open - pos);
        std::string key = tmpl.substr(open + 1, close - open - 1);
        auto it = slots.find(key);
        if (it != slots.end()) {
            out += it->second;
        } else {
            out.append(tmpl, open, close - open + 1);
        }
        pos = close + 1;
    }
    return out;
}

}  // namespace idea23d
