#include "idea23d/http_backends.hpp"

#include <cstdlib>

#include <httplib.h>

#include "idea23d/errors.hpp"
#include "idea23d/util.hpp"

using json = nlohmann::json;

namespace idea23d {

json image_payload(const Image& img) {
    auto png = encode_png(img);
    return json{{"media_type", "image/png"}, {"data_base64", base64_encode(png)}};
}

Image image_from_payload(const json& j) {
    if (j.value("media_type", "") != "image/png") {
        throw BackendContractViolation("http", "unsupported image media type");
    }
    return decode_png(base64_decode(j.at("data_base64").get<std::string>()));
}

json mesh_payload(const MeshAsset& mesh) {
    return json{{"media_type", "model/gltf-binary"},
                {"data_base64", base64_encode(encode_glb(mesh))}};
}

MeshAsset mesh_from_payload(const json& j) {
    std::string media = j.value("media_type", "");
    auto bytes = base64_decode(j.at("data_base64").get<std::string>());
    if (media == "model/gltf-binary") {
        return parse_glb(bytes);
    }
    throw BackendContractViolation("http", "unsupported mesh media type: " + media);
}

namespace {

struct ParsedUrl {
    std::string base;  // scheme://host:port
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("backend url missing scheme: " + url);
    std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

json post_backend_json(const HttpBackendConfig& cfg, const std::string& role, const json& body) {
    ParsedUrl parsed = split_url(cfg.url);
    httplib::Client client(parsed.base);
    auto timeout = std::chrono::duration<double>(cfg.timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));

    httplib::Headers headers;
    if (!cfg.api_key_env.empty()) {
        const char* key = std::getenv(cfg.api_key_env.c_str());
        if (!key) throw ConfigError("env var " + cfg.api_key_env + " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    auto res = client.Post(parsed.path, headers, body.dump(), "application/json");
    if (!res) {
        throw TransportError(role, "request to " + cfg.url + " failed: " +
                                       httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw TransportError(role,
                             "HTTP " + std::to_string(res->status) + " from " + cfg.url);
    }
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw BackendContractViolation(role, std::string("malformed JSON reply: ") + e.what());
    }
}

std::string HttpLmmBackend::complete(const LmmRequest& req) {
    json parts = json::array();
    for (const LmmPart& p : req.parts) {
        if (p.kind == LmmPart::Kind::Text) {
            parts.push_back({{"type", "text"}, {"text", p.text}});
        } else {
            json img = image_payload(p.image);
            img["type"] = "image";
            parts.push_back(img);
        }
    }
    json body{{"model", cfg_.model_name},
              {"system_prompt", req.system_prompt},
              {"parts", parts},
              {"max_output_chars", req.max_output_chars},
              {"temperature", req.temperature}};
    json reply = post_backend_json(cfg_, "lmm", body);
    if (!reply.contains("text") || !reply["text"].is_string()) {
        throw BackendContractViolation("lmm", "reply missing text field");
    }
    return reply["text"].get<std::string>();
}

std::vector<Image> HttpT2iBackend::generate(const std::string& prompt, int n_images,
                                            std::uint64_t seed) {
    json body{{"model", cfg_.model_name},
              {"prompt", prompt},
              {"n_images", n_images},
              {"seed", seed}};
    json reply = post_backend_json(cfg_, "t2i", body);
    if (!reply.contains("images") || !reply["images"].is_array()) {
        throw BackendContractViolation("t2i", "reply missing images array");
    }
    std::vector<Image> out;
    for (const json& e : reply["images"]) out.push_back(image_from_payload(e));
    return out;
}

MeshAsset HttpI23dBackend::generate(const Image& img, std::uint64_t seed) {
    json body{{"model", cfg_.model_name}, {"image", image_payload(img)}, {"seed", seed}};
    json reply = post_backend_json(cfg_, "i23d", body);
    if (!reply.contains("mesh")) {
        throw BackendContractViolation("i23d", "reply missing mesh field");
    }
    return mesh_from_payload(reply["mesh"]);
}

std::vector<float> HttpEmbedBackend::embed_request(json body) {
    body["model"] = cfg_.model_name;
    json reply = post_backend_json(cfg_, "embed", body);
    if (!reply.contains("embedding") || !reply["embedding"].is_array()) {
        throw BackendContractViolation("embed", "reply missing embedding array");
    }
    std::vector<float> out;
    for (const json& v : reply["embedding"]) out.push_back(v.get<float>());
    if (dim_ == 0) dim_ = static_cast<int>(out.size());
    return out;
}

std::vector<float> HttpEmbedBackend::embed_text(const std::string& text) {
    return embed_request(json{{"kind", "text"}, {"text", text}});
}

std::vector<float> HttpEmbedBackend::embed_image(const Image& img) {
    return embed_request(json{{"kind", "image"}, {"image", image_payload(img)}});
}

std::vector<float> HttpEmbedBackend::embed_mesh(const MeshAsset& mesh) {
    return embed_request(json{{"kind", "mesh"}, {"mesh", mesh_payload(mesh)}});
}

}  // namespace idea23d
