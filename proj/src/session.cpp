#include "idea23d/session.hpp"

#include <chrono>
#include <cstdio>

#include "idea23d/errors.hpp"
#include "idea23d/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace idea23d {

namespace {

std::string iso_timestamp() {
    using namespace std::chrono;
    auto now = system_clock::now();
    auto ms = duration_cast<milliseconds>(now.time_since_epoch()) % 1000;
    std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                  static_cast<int>(ms.count()));
    return buf;
}

}  // namespace

void BufferSink::flush_to(EventSink& sink) {
    for (auto& e : events_) sink.append(std::move(e));
    events_.clear();
}

SessionLog::SessionLog(const std::string& dir) : dir_(dir) {
    fs::create_directories(dir_);
    out_.open(dir_ / "session.jsonl", std::ios::trunc);
    if (!out_) throw IoError("cannot open session log in " + dir);
    append(json{{"type", "schema"}, {"version", kSessionSchemaVersion}});
}

void SessionLog::append(json event) {
    std::lock_guard<std::mutex> lock(mutex_);
    event["ts"] = iso_timestamp();
    out_ << event.dump() << "\n";
    out_.flush();
    events_.push_back(std::move(event));
}

void SessionLog::write_memory(const Memory& mem) const {
    write_file((dir_ / "memory.json").string(), mem.to_json().dump(2));
}

LoadedSession load_session(const std::string& dir) {
    fs::path base(dir);
    fs::path log_path = base / "session.jsonl";
    if (!fs::exists(log_path)) throw LoadError("no session.jsonl in " + dir);

    LoadedSession out;
    std::ifstream f(log_path);
    std::string line;
    bool last_line_bad = false;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        try {
            out.events.push_back(json::parse(line));
            last_line_bad = false;
        } catch (const json::exception&) {
            // Only acceptable as a truncated trailing write.
            last_line_bad = true;
        }
    }
    out.incomplete_final_event = last_line_bad;

    if (out.events.empty() || out.events.front().value("type", "") != "schema") {
        throw LoadError("session log has no schema header: " + dir);
    }
    out.schema_version = out.events.front().value("version", -1);
    if (out.schema_version != kSessionSchemaVersion) {
        throw LoadError("session schema version " + std::to_string(out.schema_version) +
                        " unsupported (expected " + std::to_string(kSessionSchemaVersion) + ")");
    }

    fs::path mem_path = base / "memory.json";
    if (fs::exists(mem_path)) {
        try {
            out.memory = Memory::from_json(json::parse(read_file(mem_path.string())));
        } catch (const json::exception& e) {
            throw LoadError("cannot parse memory.json: " + std::string(e.what()));
        }
    }
    return out;
}

namespace {

fs::path draft_dir(const std::string& session_dir, int iteration, int slot) {
    return fs::path(session_dir) / "drafts" / ("iter" + std::to_string(iteration)) /
           ("draft" + std::to_string(slot));
}

}  // namespace

void store_draft_artifacts(const std::string& session_dir, const DraftModel& draft, int slot) {
    fs::path dir = draft_dir(session_dir, draft.iteration, slot);
    fs::create_directories(dir / "views");

    json meta{{"draft_id", draft.draft_id},
              {"prompt", draft.prompt},
              {"iteration", draft.iteration},
              {"mesh_id", draft.mesh.id},
              {"gen_image_id", draft.gen_image.id},
              {"fg_image_id", draft.fg_image.id}};
    json views = json::array();
    for (const ImageAsset& v : draft.views) views.push_back(v.id);
    meta["view_ids"] = views;
    write_file((dir / "draft.json").string(), meta.dump(2));

    save_png(draft.gen_image.image, (dir / "gen.png").string());
    save_png(draft.fg_image.image, (dir / "fg.png").string());
    save_glb(draft.mesh, (dir / "mesh.glb").string());
    for (std::size_t i = 0; i < draft.views.size(); ++i) {
        std::string name = "view" + std::to_string(i);
        auto colon = draft.views[i].id.find_last_of(':');
        if (colon != std::string::npos) name = draft.views[i].id.substr(colon + 1);
        save_png(draft.views[i].image, (dir / "views" / (name + ".png")).string());
    }
}

DraftModel load_draft_artifacts(const std::string& session_dir, int iteration, int slot) {
    fs::path dir = draft_dir(session_dir, iteration, slot);
    if (!fs::exists(dir / "draft.json")) {
        throw LoadError("missing draft artifacts: " + dir.string());
    }
    json meta = json::parse(read_file((dir / "draft.json").string()));

    DraftModel d;
    d.draft_id = meta.at("draft_id").get<std::string>();
    d.prompt = meta.at("prompt").get<std::string>();
    d.iteration = meta.at("iteration").get<int>();
    d.gen_image.id = meta.at("gen_image_id").get<std::string>();
    d.gen_image.image = load_png((dir / "gen.png").string());
    d.fg_image.id = meta.at("fg_image_id").get<std::string>();
    d.fg_image.image = load_png((dir / "fg.png").string());
    d.mesh = load_glb((dir / "mesh.glb").string(), meta.at("mesh_id").get<std::string>());
    for (const json& vid : meta.at("view_ids")) {
        ImageAsset v;
        v.id = vid.get<std::string>();
        auto colon = v.id.find_last_of(':');
        std::string name = colon == std::string::npos ? v.id : v.id.substr(colon + 1);
        v.image = load_png((dir / "views" / (name + ".png")).string());
        d.views.push_back(std::move(v));
    }
    return d;
}

}  // namespace idea23d
