#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "idea23d/backend.hpp"
#include "idea23d/http_backends.hpp"
#include "idea23d/loop.hpp"
#include "idea23d/mock_backends.hpp"
#include "idea23d/templates.hpp"

namespace idea23d {

// Per-role backend selection. "mock" needs no endpoint; "http" posts to one
// JSON endpoint per role. Secrets only ever come from the named env var.
struct BackendEntry {
    std::string kind = "mock";
    HttpBackendConfig http;
    // Mock LMM knobs (ignored for other roles/kinds).
    int accept_at_iteration = -1;
    bool force_refine = false;
};

struct AppConfig {
    BackendEntry lmm, t2i, i23d, embed;
    BackendPolicy policy;
    LoopConfig loop;
    RembgConfig rembg;
    std::optional<std::string> templates_dir;  // must exist when set
    std::string session_root = "sessions";
    std::string log_level = "info";

    // Missing file at the default path yields defaults; an explicitly named
    // missing file is the caller's error.
    static AppConfig load_file(const std::string& path);
    static AppConfig from_json(const nlohmann::json& j, const std::string& base_dir);

    GatewayBackends make_backends(std::uint64_t seed) const;
    PromptTemplates load_templates() const;

    nlohmann::json echo() const;
};

}  // namespace idea23d
