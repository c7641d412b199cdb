#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "idea23d/idea.hpp"
#include "idea23d/memory.hpp"

namespace idea23d {

constexpr int kSessionSchemaVersion = 1;

// Destination for structured run events. Gateway and loop code write through
// this interface so tests can capture events without a directory.
class EventSink {
public:
    virtual ~EventSink() = default;
    virtual void append(nlohmann::json event) = 0;
};

class NullSink : public EventSink {
public:
    void append(nlohmann::json) override {}
};

// Collects events in memory; used to keep concurrent draft fan-out jobs from
// interleaving their records (each job buffers, the loop flushes in order).
class BufferSink : public EventSink {
public:
    void append(nlohmann::json event) override { events_.push_back(std::move(event)); }
    const std::vector<nlohmann::json>& events() const { return events_; }
    void flush_to(EventSink& sink);

private:
    std::vector<nlohmann::json> events_;
};

// Append-only JSONL log under <dir>/session.jsonl with a schema-version
// header event. Every append stamps "ts" and flushes, so a crashed run
// leaves at most one truncated line.
class SessionLog : public EventSink {
public:
    explicit SessionLog(const std::string& dir);
    void append(nlohmann::json event) override;

    const std::filesystem::path& dir() const { return dir_; }
    const std::vector<nlohmann::json>& events() const { return events_; }

    void write_memory(const Memory& mem) const;

private:
    std::filesystem::path dir_;
    std::ofstream out_;
    std::vector<nlohmann::json> events_;
    std::mutex mutex_;
};

struct LoadedSession {
    int schema_version = 0;
    std::vector<nlohmann::json> events;
    Memory memory;
    // True when the final line of session.jsonl was cut off mid-write; the
    // parseable prefix is still returned.
    bool incomplete_final_event = false;
};

// Throws LoadError on a missing log or a schema-version mismatch (the
// message names both versions).
LoadedSession load_session(const std::string& dir);

// Draft artifacts live under <dir>/drafts/iter<k>/draft<j>/ as draft.json,
// gen.png, fg.png, mesh.glb and views/<name>.png.
void store_draft_artifacts(const std::string& session_dir, const DraftModel& draft, int slot);
DraftModel load_draft_artifacts(const std::string& session_dir, int iteration, int slot);

}  // namespace idea23d
