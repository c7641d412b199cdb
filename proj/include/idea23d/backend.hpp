#pragma once

#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "idea23d/idea.hpp"
#include "idea23d/image.hpp"
#include "idea23d/mesh.hpp"
#include "idea23d/rembg.hpp"
#include "idea23d/session.hpp"

namespace idea23d {

struct LmmPart {
    enum class Kind { Text, Image };
    Kind kind = Kind::Text;
    std::string text;
    Image image;
    std::string image_id;

    static LmmPart make_text(std::string t) {
        LmmPart p;
        p.kind = Kind::Text;
        p.text = std::move(t);
        return p;
    }
    static LmmPart make_image(const Image& img, std::string id) {
        LmmPart p;
        p.kind = Kind::Image;
        p.image = img;
        p.image_id = std::move(id);
        return p;
    }
};

struct LmmRequest {
    std::string system_prompt;
    std::vector<LmmPart> parts;
    int max_output_chars = 8192;
    double temperature = 0.0;

    std::size_t image_count() const;
    // nullopt means valid; invalid requests are rejected before transport.
    std::optional<std::string> validate() const;
};

struct BackendPolicy {
    double timeout_s = 120.0;
    int max_retries = 2;
    double backoff_base_s = 2.0;
    int parallel_limit = 4;

    std::optional<std::string> validate() const;
};

class LmmBackend {
public:
    virtual ~LmmBackend() = default;
    virtual std::string name() const = 0;
    virtual std::string complete(const LmmRequest& req) = 0;
};

class T2iBackend {
public:
    virtual ~T2iBackend() = default;
    virtual std::string name() const = 0;
    virtual std::vector<Image> generate(const std::string& prompt, int n_images,
                                        std::uint64_t seed) = 0;
};

class I23dBackend {
public:
    virtual ~I23dBackend() = default;
    virtual std::string name() const = 0;
    virtual MeshAsset generate(const Image& img, std::uint64_t seed) = 0;
};

class EmbedBackend {
public:
    virtual ~EmbedBackend() = default;
    virtual std::string name() const = 0;
    virtual int dim() const = 0;
    virtual std::vector<float> embed_text(const std::string& text) = 0;
    virtual std::vector<float> embed_image(const Image& img) = 0;
    virtual std::vector<float> embed_mesh(const MeshAsset& mesh) = 0;
};

struct GatewayBackends {
    std::shared_ptr<LmmBackend> lmm;
    std::shared_ptr<T2iBackend> t2i;
    std::shared_ptr<I23dBackend> i23d;
    std::shared_ptr<EmbedBackend> embed;
};

// Uniform front door for the four model roles plus the built-in background
// removal step. Enforces request invariants before transport, retries
// transport failures with exponential backoff, bounds per-backend
// concurrency, and appends exactly one request/response record per call to
// the given sink.
class Gateway {
public:
    explicit Gateway(GatewayBackends backends, BackendPolicy policy = {},
                     RembgConfig rembg = {});

    std::string lmm_complete(const LmmRequest& req, EventSink& sink);
    std::vector<ImageAsset> t2i_generate(const std::string& prompt, int n_images,
                                         std::uint64_t seed, EventSink& sink);
    ImageAsset remove_background(const ImageAsset& img, EventSink& sink);
    MeshAsset i23d_generate(const ImageAsset& img, std::uint64_t seed, EventSink& sink);
    std::vector<float> embed_text(const std::string& text, EventSink& sink);
    std::vector<float> embed_image(const ImageAsset& img, EventSink& sink);
    std::vector<float> embed_mesh(const MeshAsset& mesh, EventSink& sink);

    const BackendPolicy& policy() const { return policy_; }
    bool has_lmm() const { return backends_.lmm != nullptr; }
    bool has_embed() const { return backends_.embed != nullptr; }

    // Overridable for tests; production sleeps for real.
    std::function<void(double)> sleep_fn;

private:
    class Semaphore {
    public:
        explicit Semaphore(int count) : count_(count) {}
        void acquire();
        void release();

    private:
        std::mutex m_;
        std::condition_variable cv_;
        int count_;
    };

    // Runs `fn` under the role's semaphore with the retry policy, recording
    // one backend_call event (status, retries, latency_ms).
    template <typename Fn>
    auto call(const std::string& role, const std::string& backend_name,
              nlohmann::json request_summary, EventSink& sink, Fn&& fn)
        -> decltype(fn());

    Semaphore& semaphore_for(const std::string& role);

    GatewayBackends backends_;
    BackendPolicy policy_;
    RembgConfig rembg_;
    Semaphore lmm_sem_, t2i_sem_, i23d_sem_, embed_sem_, rembg_sem_;
};

std::vector<float> normalize_or_throw(std::vector<float> v, const std::string& role);

}  // namespace idea23d
