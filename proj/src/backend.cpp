#include "idea23d/backend.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "idea23d/errors.hpp"
#include "idea23d/util.hpp"

using json = nlohmann::json;

namespace idea23d {

std::size_t LmmRequest::image_count() const {
    std::size_t n = 0;
    for (const LmmPart& p : parts) {
        if (p.kind == LmmPart::Kind::Image) ++n;
    }
    return n;
}

std::optional<std::string> LmmRequest::validate() const {
    if (parts.empty()) return "request has no parts";
    if (image_count() > 16) return "request exceeds 16 images";
    if (temperature < 0.0) return "temperature below 0";
    if (max_output_chars < 1) return "max_output_chars below 1";
    return std::nullopt;
}

std::optional<std::string> BackendPolicy::validate() const {
    if (timeout_s <= 0) return "timeout_s must be positive";
    if (max_retries < 0) return "max_retries must be >= 0";
    if (parallel_limit < 1) return "parallel_limit must be >= 1";
    return std::nullopt;
}

void Gateway::Semaphore::acquire() {
    std::unique_lock<std::mutex> lock(m_);
    cv_.wait(lock, [&] { return count_ > 0; });
    --count_;
}

void Gateway::Semaphore::release() {
    {
        std::lock_guard<std::mutex> lock(m_);
        ++count_;
    }
    cv_.notify_one();
}

Gateway::Gateway(GatewayBackends backends, BackendPolicy policy, RembgConfig rembg)
    : backends_(std::move(backends)),
      policy_(policy),
      rembg_(rembg),
      lmm_sem_(policy.parallel_limit),
      t2i_sem_(policy.parallel_limit),
      i23d_sem_(policy.parallel_limit),
      embed_sem_(policy.parallel_limit),
      rembg_sem_(policy.parallel_limit) {
    if (auto issue = policy_.validate()) throw ConfigError(*issue);
    sleep_fn = [](double seconds) {
        std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    };
}

Gateway::Semaphore& Gateway::semaphore_for(const std::string& role) {
    if (role == "lmm") return lmm_sem_;
    if (role == "t2i") return t2i_sem_;
    if (role == "i23d") return i23d_sem_;
    if (role == "rembg") return rembg_sem_;
    return embed_sem_;
}

template <typename Fn>
auto Gateway::call(const std::string& role, const std::string& backend_name,
                   json request_summary, EventSink& sink, Fn&& fn) -> decltype(fn()) {
    Semaphore& sem = semaphore_for(role);
    sem.acquire();
    auto started = std::chrono::steady_clock::now();
    int retries = 0;
    json event{{"type", "backend_call"},
               {"role", role},
               {"backend", backend_name},
               {"request", std::move(request_summary)}};
    try {
        for (int attempt = 0;; ++attempt) {
            try {
                auto result = fn();
                auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - started)
                                   .count();
                event["status"] = "ok";
                event["retries"] = retries;
                event["latency_ms"] = elapsed;
                sem.release();
                sink.append(std::move(event));
                return result;
            } catch (const TransportError&) {
                if (attempt >= policy_.max_retries) throw;
                ++retries;
                sleep_fn(policy_.backoff_base_s * std::pow(2.0, attempt));
            }
        }
    } catch (const std::exception& e) {
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
        event["status"] = "error";
        event["retries"] = retries;
        event["latency_ms"] = elapsed;
        event["error"] = e.what();
        sem.release();
        sink.append(std::move(event));
        throw;
    }
}

std::string Gateway::lmm_complete(const LmmRequest& req, EventSink& sink) {
    if (!backends_.lmm) throw ConfigError("no lmm backend configured");
    if (auto issue = req.validate()) throw ValidationError("lmm request: " + *issue);

    json parts = json::array();
    for (const LmmPart& p : req.parts) {
        if (p.kind == LmmPart::Kind::Text) {
            parts.push_back({{"text", p.text}});
        } else {
            parts.push_back({{"image_id", p.image_id}, {"digest", p.image.content_digest()}});
        }
    }
    json summary{{"system_prompt", req.system_prompt},
                 {"parts", parts},
                 {"temperature", req.temperature}};

    return call("lmm", backends_.lmm->name(), std::move(summary), sink, [&] {
        std::string text = backends_.lmm->complete(req);
        if (text.empty()) throw EmptyResponse("lmm");
        return text;
    });
}

std::vector<ImageAsset> Gateway::t2i_generate(const std::string& prompt, int n_images,
                                              std::uint64_t seed, EventSink& sink) {
    if (!backends_.t2i) throw ConfigError("no t2i backend configured");
    if (prompt.empty()) throw ValidationError("t2i prompt is empty");
    if (n_images < 1) throw ValidationError("t2i n_images must be >= 1");

    json summary{{"prompt", prompt}, {"n_images", n_images}, {"seed", seed}};
    return call("t2i", backends_.t2i->name(), std::move(summary), sink, [&] {
        std::vector<Image> images = backends_.t2i->generate(prompt, n_images, seed);
        if (images.empty()) {
            throw BackendContractViolation("t2i", "backend returned zero images");
        }
        std::vector<ImageAsset> out;
        for (std::size_t k = 0; k < images.size(); ++k) {
            ImageAsset a;
            a.id = "gen-" + sha256_hex(prompt).substr(0, 8) + "-" + std::to_string(seed) + "-" +
                   std::to_string(k);
            a.image = std::move(images[k]);
            out.push_back(std::move(a));
        }
        return out;
    });
}

ImageAsset Gateway::remove_background(const ImageAsset& img, EventSink& sink) {
    json summary{{"image_id", img.id}, {"digest", img.image.content_digest()}};
    return call("rembg", "builtin", std::move(summary), sink, [&] {
        ImageAsset out;
        out.id = img.id + ":fg";
        out.image = idea23d::remove_background(img.image, rembg_);
        return out;
    });
}

MeshAsset Gateway::i23d_generate(const ImageAsset& img, std::uint64_t seed, EventSink& sink) {
    if (!backends_.i23d) throw ConfigError("no i23d backend configured");
    bool any_fg = false;
    for (std::size_t i = 3; i < img.image.pixels().size(); i += 4) {
        if (img.image.pixels()[i] > 0) {
            any_fg = true;
            break;
        }
    }
    if (!any_fg) throw ValidationError("i23d input image is fully transparent");

    json summary{{"image_id", img.id}, {"digest", img.image.content_digest()}, {"seed", seed}};
    return call("i23d", backends_.i23d->name(), std::move(summary), sink, [&] {
        MeshAsset mesh = backends_.i23d->generate(img.image, seed);
        auto issues = validate_mesh(mesh.geometry);
        if (!issues.empty()) {
            throw BackendContractViolation("i23d", "invalid mesh: " + issues.front());
        }
        return mesh;
    });
}

std::vector<float> normalize_or_throw(std::vector<float> v, const std::string& role) {
    if (v.empty()) throw BackendContractViolation(role, "empty embedding");
    double norm_sq = 0.0;
    for (float x : v) {
        if (!std::isfinite(x)) throw BackendContractViolation(role, "non-finite embedding value");
        norm_sq += static_cast<double>(x) * x;
    }
    double norm = std::sqrt(norm_sq);
    if (std::abs(norm - 1.0) > 1e-6) {
        throw BackendContractViolation(role, "embedding norm " + std::to_string(norm) +
                                                 " outside 1 +/- 1e-6");
    }
    return v;
}

std::vector<float> Gateway::embed_text(const std::string& text, EventSink& sink) {
    if (!backends_.embed) throw ConfigError("no embed backend configured");
    json summary{{"kind", "text"}, {"digest", sha256_hex(text)}};
    return call("embed", backends_.embed->name(), std::move(summary), sink, [&] {
        return normalize_or_throw(backends_.embed->embed_text(text), "embed");
    });
}

std::vector<float> Gateway::embed_image(const ImageAsset& img, EventSink& sink) {
    if (!backends_.embed) throw ConfigError("no embed backend configured");
    json summary{{"kind", "image"}, {"digest", img.image.content_digest()}};
    return call("embed", backends_.embed->name(), std::move(summary), sink, [&] {
        return normalize_or_throw(backends_.embed->embed_image(img.image), "embed");
    });
}

std::vector<float> Gateway::embed_mesh(const MeshAsset& mesh, EventSink& sink) {
    if (!backends_.embed) throw ConfigError("no embed backend configured");
    json summary{{"kind", "mesh"}, {"digest", mesh_content_digest(mesh)}};
    return call("embed", backends_.embed->name(), std::move(summary), sink, [&] {
        return normalize_or_throw(backends_.embed->embed_mesh(mesh), "embed");
    });
}

}  // namespace idea23d
