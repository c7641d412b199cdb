#include "idea23d/memory.hpp"

#include "idea23d/errors.hpp"

using json = nlohmann::json;

namespace idea23d {

void Memory::append(MemoryRecord record) {
    if (record.iteration != static_cast<int>(records_.size())) {
        throw MemoryOrderError("expected iteration " + std::to_string(records_.size()) +
                               ", got " + std::to_string(record.iteration));
    }
    records_.push_back(std::move(record));
}

std::string Memory::digest(std::size_t budget_chars) const {
    if (budget_chars < 256) throw ValidationError("memory digest budget below 256 chars");
    if (records_.empty()) return "";

    std::vector<std::string> blocks;  // newest first
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
        blocks.push_back("[iter " + std::to_string(it->iteration) + "] prompt: " +
                         it->best_prompt + "; feedback: " + it->feedback);
    }

    // Keep the newest block unconditionally, then older ones while they fit.
    std::string out = blocks.front();
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        if (out.size() + 1 + blocks[i].size() > budget_chars) break;
        out += "\n" + blocks[i];
    }
    return out;
}

json Memory::to_json() const {
    json arr = json::array();
    for (const MemoryRecord& r : records_) {
        arr.push_back({{"iteration", r.iteration},
                       {"best_prompt", r.best_prompt},
                       {"best_draft_id", r.best_draft_ref.draft_id},
                       {"best_mesh_digest", r.best_draft_ref.mesh_digest},
                       {"feedback", r.feedback}});
    }
    return json{{"records", arr}};
}

Memory Memory::from_json(const json& j) {
    Memory mem;
    for (const json& e : j.at("records")) {
        MemoryRecord r;
        r.iteration = e.at("iteration").get<int>();
        r.best_prompt = e.at("best_prompt").get<std::string>();
        r.best_draft_ref.draft_id = e.at("best_draft_id").get<std::string>();
        r.best_draft_ref.mesh_digest = e.at("best_mesh_digest").get<std::string>();
        r.feedback = e.at("feedback").get<std::string>();
        mem.append(std::move(r));
    }
    return mem;
}

}  // namespace idea23d
