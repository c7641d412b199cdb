#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "idea23d/backend.hpp"
#include "idea23d/render.hpp"

namespace idea23d {

// The mock family shares one color code: significant words map to quantized
// palette colors, the mock T2I paints prompt words as vertical bars, the
// mock I23D projects the image onto an extruded silhouette, and the mock
// embedder recovers the word colors from rendered pixels. That gives the
// whole offline pipeline a real signal (prompt wording measurably changes
// scores) while staying a pure function of its inputs.
namespace mocktok {

// Palette channels take values 16, 32, ..., 208; the max channel is always
// 208 so the flat-shading factor can be divided back out, and the uniform
// gray (208,208,208) is excluded because unshaded base-color pixels land on
// it.
int palette_size();
Rgba color_for_id(int id);
std::optional<int> id_for_color(Rgba shaded);

// Lowercased alnum words, minimum 3 chars, scaffold words filtered, order
// preserved, deduplicated.
std::vector<std::string> tokenize(const std::string& text);
int token_id(const std::string& token);

// Color ids whose pixel share among decodable opaque pixels is significant.
std::set<int> decode_tokens(const Image& img);

// Words with a stable id -> word mapping for feedback and captioning mocks.
const std::vector<std::string>& vocabulary();
std::optional<std::string> word_for_id(int id);

}  // namespace mocktok

struct MockT2iConfig {
    int width = 256;
    int height = 256;
};

// Plain light background, one centered shape (picked from the prompt hash)
// filled with per-word color bars.
class MockT2iBackend : public T2iBackend {
public:
    explicit MockT2iBackend(MockT2iConfig cfg = {}) : cfg_(cfg) {}
    std::string name() const override { return "mock-t2i"; }
    std::vector<Image> generate(const std::string& prompt, int n_images,
                                std::uint64_t seed) override;

private:
    MockT2iConfig cfg_;
};

struct MockI23dConfig {
    // Silhouette sampling grid along the mask bounding box.
    int grid = 96;
};

// Extrudes the input alpha mask into a textured slab; the image hash picks
// the depth profile (thin sheet / deep block / medium). Front and back faces
// stay flat so projected colors survive shading; side walls sample a dark
// trim strip appended to the texture.
class MockI23dBackend : public I23dBackend {
public:
    explicit MockI23dBackend(MockI23dConfig cfg = {}) : cfg_(cfg) {}
    std::string name() const override { return "mock-i23d"; }
    MeshAsset generate(const Image& img, std::uint64_t seed) override;

private:
    MockI23dConfig cfg_;
};

struct MockEmbedConfig {
    int dim = 64;
    std::uint64_t seed = 7;
    int view_resolution = 256;
};

// Embedding = normalized sum of per-word unit vectors; words come from text
// directly, from decoded bar colors for images, and from decoded rendered
// views (front/back/left/right) for meshes.
class MockEmbedBackend : public EmbedBackend {
public:
    explicit MockEmbedBackend(MockEmbedConfig cfg = {}) : cfg_(cfg) {}
    std::string name() const override { return "mock-embed"; }
    int dim() const override { return cfg_.dim; }
    std::vector<float> embed_text(const std::string& text) override;
    std::vector<float> embed_image(const Image& img) override;
    std::vector<float> embed_mesh(const MeshAsset& mesh) override;

    std::vector<float> combine_ids(const std::set<int>& ids) const;

private:
    MockEmbedConfig cfg_;
};

struct MockLmmConfig {
    std::uint64_t seed = 0;
    // -1: accept once the draft covers the idea's words; k >= 0: accept at
    // iteration k regardless of content; force_refine wins over both.
    int accept_at_iteration = -1;
    bool force_refine = false;
};

// Stand-in for the three agent roles. The role is recognized from the
// instantiated template markers ("BEST:", "VERDICT:", "CAPTION"); answers
// depend only on the request content, so concurrent runs stay deterministic.
class MockLmmBackend : public LmmBackend {
public:
    explicit MockLmmBackend(MockLmmConfig cfg = {}) : cfg_(cfg) {}
    std::string name() const override { return "mock-lmm"; }
    std::string complete(const LmmRequest& req) override;

private:
    std::string answer_generate(const LmmRequest& req) const;
    std::string answer_select(const LmmRequest& req) const;
    std::string answer_feedback(const LmmRequest& req) const;
    std::string answer_caption(const LmmRequest& req) const;

    MockLmmConfig cfg_;
};

// FIFO transcript; throws TransportError when exhausted.
class ScriptedLmmBackend : public LmmBackend {
public:
    explicit ScriptedLmmBackend(std::vector<std::string> replies)
        : replies_(std::move(replies)) {}
    std::string name() const override { return "scripted-lmm"; }
    std::string complete(const LmmRequest& req) override;
    std::size_t calls() const { return next_; }

private:
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
    std::mutex mutex_;
};

// Lambda-backed adapters for fault-injection tests.
class FnLmmBackend : public LmmBackend {
public:
    explicit FnLmmBackend(std::function<std::string(const LmmRequest&)> fn)
        : fn_(std::move(fn)) {}
    std::string name() const override { return "fn-lmm"; }
    std::string complete(const LmmRequest& req) override { return fn_(req); }

private:
    std::function<std::string(const LmmRequest&)> fn_;
};

class FnT2iBackend : public T2iBackend {
public:
    explicit FnT2iBackend(
        std::function<std::vector<Image>(const std::string&, int, std::uint64_t)> fn)
        : fn_(std::move(fn)) {}
    std::string name() const override { return "fn-t2i"; }
    std::vector<Image> generate(const std::string& prompt, int n, std::uint64_t seed) override {
        return fn_(prompt, n, seed);
    }

private:
    std::function<std::vector<Image>(const std::string&, int, std::uint64_t)> fn_;
};

class FnI23dBackend : public I23dBackend {
public:
    explicit FnI23dBackend(std::function<MeshAsset(const Image&, std::uint64_t)> fn)
        : fn_(std::move(fn)) {}
    std::string name() const override { return "fn-i23d"; }
    MeshAsset generate(const Image& img, std::uint64_t seed) override { return fn_(img, seed); }

private:
    std::function<MeshAsset(const Image&, std::uint64_t)> fn_;
};

// Default all-mock backend set for offline runs.
GatewayBackends make_mock_backends(std::uint64_t seed, MockLmmConfig lmm_cfg = {});

}  // namespace idea23d
