#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "idea23d/backend.hpp"

namespace idea23d {

// Every role speaks the same wire shape: one POST endpoint, JSON in and out,
// binary payloads base64-encoded with declared media types ("image/png",
// "model/gltf-binary"). Real model servers sit behind thin translation shims.
struct HttpBackendConfig {
    std::string url;          // e.g. http://127.0.0.1:8080/lmm
    std::string api_key_env;  // env var holding a bearer token, optional
    std::string model_name;
    double timeout_s = 120.0;
};

nlohmann::json image_payload(const Image& img);
Image image_from_payload(const nlohmann::json& j);
nlohmann::json mesh_payload(const MeshAsset& mesh);
MeshAsset mesh_from_payload(const nlohmann::json& j);

// POSTs `body` to the configured endpoint. Connection failures, timeouts and
// non-200 statuses raise TransportError (retryable); malformed reply bodies
// raise BackendContractViolation.
nlohmann::json post_backend_json(const HttpBackendConfig& cfg, const std::string& role,
                                 const nlohmann::json& body);

class HttpLmmBackend : public LmmBackend {
public:
    explicit HttpLmmBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {}
    std::string name() const override { return "http:" + cfg_.model_name; }
    std::string complete(const LmmRequest& req) override;

private:
    HttpBackendConfig cfg_;
};

class HttpT2iBackend : public T2iBackend {
public:
    explicit HttpT2iBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {}
    std::string name() const override { return "http:" + cfg_.model_name; }
    std::vector<Image> generate(const std::string& prompt, int n_images,
                                std::uint64_t seed) override;

private:
    HttpBackendConfig cfg_;
};

class HttpI23dBackend : public I23dBackend {
public:
    explicit HttpI23dBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {}
    std::string name() const override { return "http:" + cfg_.model_name; }
    MeshAsset generate(const Image& img, std::uint64_t seed) override;

private:
    HttpBackendConfig cfg_;
};

class HttpEmbedBackend : public EmbedBackend {
public:
    explicit HttpEmbedBackend(HttpBackendConfig cfg, int dim = 0)
        : cfg_(std::move(cfg)), dim_(dim) {}
    std::string name() const override { return "http:" + cfg_.model_name; }
    int dim() const override { return dim_; }
    std::vector<float> embed_text(const std::string& text) override;
    std::vector<float> embed_image(const Image& img) override;
    std::vector<float> embed_mesh(const MeshAsset& mesh) override;

private:
    std::vector<float> embed_request(nlohmann::json body);

    HttpBackendConfig cfg_;
    int dim_;
};

}  // namespace idea23d
