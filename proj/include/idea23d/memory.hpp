#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace idea23d {

struct DraftRef {
    std::string draft_id;
    std::string mesh_digest;  // sha256 hex over canonical mesh bytes
};

// Per-iteration record of the winning prompt, draft and the feedback that
// followed it (empty for the accepting iteration).
struct MemoryRecord {
    int iteration = 0;
    std::string best_prompt;
    DraftRef best_draft_ref;
    std::string feedback;
};

// Ordered, append-only during a run; iterations are consecutive from 0.
class Memory {
public:
    const std::vector<MemoryRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    // record.iteration must equal the current length; gaps and duplicates
    // raise MemoryOrderError.
    void append(MemoryRecord record);

    // Newline-delimited "[iter k] prompt: ...; feedback: ..." blocks, most
    // recent first. Oldest blocks are dropped first to fit the budget; the
    // newest block is always kept whole. budget_chars must be >= 256.
    std::string digest(std::size_t budget_chars) const;

    nlohmann::json to_json() const;
    static Memory from_json(const nlohmann::json& j);

private:
    std::vector<MemoryRecord> records_;
};

}  // namespace idea23d
