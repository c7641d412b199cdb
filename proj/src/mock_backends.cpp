#include "idea23d/mock_backends.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "idea23d/errors.hpp"
#include "idea23d/util.hpp"

namespace idea23d {

namespace mocktok {

namespace {

constexpr int kLevels = 13;  // channel values 16..208 step 16
constexpr int kMaxChannel = 208;

// Palette: all (r,g,b) on the 16..208 grid whose max channel is 208, minus
// the uniform gray corner.
std::vector<Rgba>& palette_table() {
    static std::vector<Rgba> table = [] {
        std::vector<Rgba> t;
        for (int r = 0; r < kLevels; ++r) {
            for (int g = 0; g < kLevels; ++g) {
                for (int b = 0; b < kLevels; ++b) {
                    int cr = 16 + 16 * r, cg = 16 + 16 * g, cb = 16 + 16 * b;
                    if (std::max({cr, cg, cb}) != kMaxChannel) continue;
                    if (cr == kMaxChannel && cg == kMaxChannel && cb == kMaxChannel) continue;
                    t.push_back({static_cast<std::uint8_t>(cr), static_cast<std::uint8_t>(cg),
                                 static_cast<std::uint8_t>(cb), 255});
                }
            }
        }
        return t;
    }();
    return table;
}

const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {
        "the",       "and",   "with",   "for",       "this",  "that",    "are",
        "was",       "its",   "from",   "into",      "onto",  "has",     "have",
        "attachment","image", "images", "iteration", "missing","none",   "idea",
        "feedback",  "memory","draft",  "drafts",    "prompt","prompts", "view",
        "views",     "case",  "one",    "per",       "all",   "any",     "not"};
    return words;
}

}  // namespace

int palette_size() { return static_cast<int>(palette_table().size()); }

Rgba color_for_id(int id) {
    const auto& t = palette_table();
    return t[static_cast<std::size_t>(id) % t.size()];
}

std::optional<int> id_for_color(Rgba c) {
    int m = std::max({static_cast<int>(c.r), static_cast<int>(c.g), static_cast<int>(c.b)});
    if (m < 48 || m > kMaxChannel) return std::nullopt;  // too dark to trust, or brighter
                                                         // than any shaded palette color
    double s = static_cast<double>(m) / kMaxChannel;
    int ch[3] = {c.r, c.g, c.b};
    int snapped[3];
    for (int i = 0; i < 3; ++i) {
        double unshaded = ch[i] / s;
        int k = static_cast<int>(std::lround((unshaded - 16.0) / 16.0));
        if (k < 0 || k >= kLevels) return std::nullopt;
        snapped[i] = 16 + 16 * k;
        if (std::abs(unshaded - snapped[i]) > 5.0) return std::nullopt;
    }
    if (std::max({snapped[0], snapped[1], snapped[2]}) != kMaxChannel) return std::nullopt;
    if (snapped[0] == kMaxChannel && snapped[1] == kMaxChannel && snapped[2] == kMaxChannel) {
        return std::nullopt;
    }
    const auto& t = palette_table();
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i].r == snapped[0] && t[i].g == snapped[1] && t[i].b == snapped[2]) {
            return static_cast<int>(i);
        }
    }
    return std::nullopt;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::string word;
    auto flush = [&] {
        if (word.size() >= 3 && !stopwords().count(word) && !seen.count(word)) {
            bool all_digits = std::all_of(word.begin(), word.end(),
                                          [](char c) { return c >= '0' && c <= '9'; });
            if (!all_digits) {
                out.push_back(word);
                seen.insert(word);
            }
        }
        word.clear();
    };
    for (char raw : text) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            word.push_back(c);
        } else {
            flush();
        }
    }
    flush();
    return out;
}

int token_id(const std::string& token) {
    return static_cast<int>(fnv1a64(token) % static_cast<std::uint64_t>(palette_size()));
}

std::set<int> decode_tokens(const Image& img) {
    std::map<int, std::size_t> counts;
    std::size_t opaque = 0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            Rgba c = img.at(x, y);
            if (c.a == 0) continue;
            ++opaque;
            if (auto id = id_for_color(c)) counts[*id] += 1;
        }
    }
    std::set<int> out;
    std::size_t threshold = std::max<std::size_t>(32, opaque / 200);
    for (auto [id, n] : counts) {
        if (n >= threshold) out.insert(id);
    }
    return out;
}

const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> words = {
        "rabbit",  "doughnut", "car",      "tree",    "house",   "chair",   "table",
        "lamp",    "mug",      "bottle",   "hat",     "boot",    "robot",   "dragon",
        "castle",  "bridge",   "tower",    "boat",    "plane",   "train",   "rocket",
        "guitar",  "piano",    "drum",     "violin",  "apple",   "banana",  "cherry",
        "lemon",   "orange",   "pumpkin",  "mushroom","cactus",  "flower",  "leaf",
        "stone",   "wood",     "metal",    "glass",   "golden",  "silver",  "copper",
        "red",     "green",    "blue",     "yellow",  "purple",  "pink",    "white",
        "black",   "round",    "square",   "tall",    "small",   "large",   "tiny",
        "fluffy",  "smooth",   "rough",    "shiny",   "striped", "spotted", "curved",
        "bird",    "fish",     "turtle",   "snail",   "bear",    "fox",     "owl",
        "panda",   "penguin",  "whale",    "crab",    "spider",  "bee",     "frog",
        "helmet",  "shield",   "sword",    "crown",   "ring",    "clock",   "book",
        "candle",  "basket",   "barrel",   "wheel",   "anchor",  "kite",    "drumstick",
        "wing",    "horn",     "tail",     "paw",     "saddle",  "ladder",  "bench",
        "fountain","statue",   "pyramid",  "igloo",   "tent",    "windmill","lighthouse",
        "snowman", "umbrella", "backpack", "lantern", "mirror",  "vase",    "teapot",
        "cushion", "carpet",   "curtain",  "door",    "window",  "roof",    "chimney"};
    return words;
}

std::optional<std::string> word_for_id(int id) {
    static const std::map<int, std::string> index = [] {
        std::map<int, std::string> m;
        for (const std::string& w : vocabulary()) {
            m.emplace(token_id(w), w);  // first word wins on collision
        }
        return m;
    }();
    auto it = index.find(id);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

}  // namespace mocktok

// ------------------------------------------------------------- MockT2i ----

std::vector<Image> MockT2iBackend::generate(const std::string& prompt, int n_images,
                                            std::uint64_t seed) {
    std::vector<Image> out;
    out.reserve(n_images);
    for (int k = 0; k < n_images; ++k) {
        std::uint64_t h = mix_seed(fnv1a64(prompt), mix_seed(seed, static_cast<std::uint64_t>(k)));
        Image img(cfg_.width, cfg_.height, {240, 240, 240, 255});

        std::vector<std::string> tokens = mocktok::tokenize(prompt);
        if (tokens.size() > 16) tokens.resize(16);

        const int w = cfg_.width, hh = cfg_.height;
        const int cx = w / 2, cy = hh / 2;
        bool disk = (h >> 4) % 2 == 0;
        const int half = static_cast<int>(0.38 * std::min(w, hh));

        int bx0 = cx - half, bx1 = cx + half;
        auto inside = [&](int x, int y) {
            if (disk) {
                long dx = x - cx, dy = y - cy;
                return dx * dx + dy * dy <= static_cast<long>(half) * half;
            }
            return std::abs(x - cx) <= half && std::abs(y - cy) <= half;
        };

        for (int y = 0; y < hh; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!inside(x, y)) continue;
                Rgba color{128, 128, 128, 255};
                if (!tokens.empty()) {
                    int bar = static_cast<int>(
                        (static_cast<long>(x - bx0) * static_cast<long>(tokens.size())) /
                        std::max(1, bx1 - bx0));
                    bar = std::clamp(bar, 0, static_cast<int>(tokens.size()) - 1);
                    color = mocktok::color_for_id(mocktok::token_id(tokens[bar]));
                }
                img.set(x, y, color);
            }
        }
        out.push_back(std::move(img));
    }
    return out;
}

// ------------------------------------------------------------ MockI23d ----

namespace {

constexpr int kTrimRows = 6;

struct MaskGrid {
    int gx = 0, gy = 0;
    int x0 = 0, y0 = 0;
    double cell = 0.0;
    std::vector<std::uint8_t> solid;  // gx * gy

    bool at(int i, int j) const {
        if (i < 0 || j < 0 || i >= gx || j >= gy) return false;
        return solid[static_cast<std::size_t>(j) * gx + i] != 0;
    }
};

MaskGrid build_mask_grid(const Image& img, int grid) {
    int min_x = img.width(), min_y = img.height(), max_x = -1, max_y = -1;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (img.at(x, y).a > 0) {
                min_x = std::min(min_x, x);
                min_y = std::min(min_y, y);
                max_x = std::max(max_x, x);
                max_y = std::max(max_y, y);
            }
        }
    }
    if (max_x < 0) throw BackendContractViolation("i23d", "input image has no foreground");

    MaskGrid g;
    int bw = max_x - min_x + 1;
    int bh = max_y - min_y + 1;
    g.cell = static_cast<double>(std::max(bw, bh)) / grid;
    g.gx = std::max(1, static_cast<int>(std::ceil(bw / g.cell)));
    g.gy = std::max(1, static_cast<int>(std::ceil(bh / g.cell)));
    g.x0 = min_x;
    g.y0 = min_y;
    g.solid.assign(static_cast<std::size_t>(g.gx) * g.gy, 0);

    for (int j = 0; j < g.gy; ++j) {
        for (int i = 0; i < g.gx; ++i) {
            int px0 = g.x0 + static_cast<int>(std::floor(i * g.cell));
            int px1 = g.x0 + static_cast<int>(std::floor((i + 1) * g.cell));
            int py0 = g.y0 + static_cast<int>(std::floor(j * g.cell));
            int py1 = g.y0 + static_cast<int>(std::floor((j + 1) * g.cell));
            px1 = std::min(px1, img.width() - 1);
            py1 = std::min(py1, img.height() - 1);
            int total = 0, on = 0;
            for (int y = py0; y <= py1; ++y) {
                for (int x = px0; x <= px1; ++x) {
                    if (x < 0 || y < 0) continue;
                    ++total;
                    if (img.at(x, y).a > 0) ++on;
                }
            }
            if (total > 0 && on * 2 >= total) {
                g.solid[static_cast<std::size_t>(j) * g.gx + i] = 1;
            }
        }
    }
    return g;
}

}  // namespace

MeshAsset MockI23dBackend::generate(const Image& img, std::uint64_t seed) {
    (void)seed;  // recorded by the gateway; geometry depends on the image only
    MaskGrid grid = build_mask_grid(img, cfg_.grid);

    std::uint64_t h = fnv1a64(img.pixels());
    static constexpr double kDepths[3] = {0.12, 0.45, 0.28};
    const double depth = kDepths[h % 3];

    // Texture: the input image plus a dark trim strip sampled by side walls.
    Image texture(img.width(), img.height() + kTrimRows);
    texture.blit(img, 0, 0);
    for (int y = img.height(); y < texture.height(); ++y) {
        for (int x = 0; x < texture.width(); ++x) {
            texture.set(x, y, {30, 30, 30, 255});
        }
    }
    const double trim_u = 0.5;
    const double trim_v = (img.height() + kTrimRows * 0.5) / texture.height();

    MeshAsset asset;
    asset.id = "mesh-" + sha256_hex(img.pixels()).substr(0, 8);
    asset.texture = std::move(texture);
    TriangleMesh& m = asset.geometry;

    const double span = grid.cell * std::max(grid.gx, grid.gy);
    const double cx = grid.x0 + grid.cell * grid.gx * 0.5;
    const double cy = grid.y0 + grid.cell * grid.gy * 0.5;

    auto node_pos = [&](int i, int j, bool front) -> Vec3 {
        double px = grid.x0 + i * grid.cell;
        double py = grid.y0 + j * grid.cell;
        return {static_cast<float>((px - cx) / span), static_cast<float>((cy - py) / span),
                front ? 0.0f : static_cast<float>(-depth)};
    };
    auto node_uv = [&](int i, int j) -> Vec2 {
        double px = std::clamp(grid.x0 + i * grid.cell, 0.0, img.width() - 1.0);
        double py = std::clamp(grid.y0 + j * grid.cell, 0.0, img.height() - 1.0);
        return {static_cast<float>(px / img.width()),
                static_cast<float>(py / asset.texture->height())};
    };

    // Shared grid nodes for the two flat faces, allocated on demand.
    std::map<std::tuple<int, int, int>, std::uint32_t> node_index;
    auto node = [&](int i, int j, bool front) -> std::uint32_t {
        auto key = std::make_tuple(i, j, front ? 1 : 0);
        auto it = node_index.find(key);
        if (it != node_index.end()) return it->second;
        m.positions.push_back(node_pos(i, j, front));
        m.uvs.push_back(node_uv(i, j));
        std::uint32_t ix = static_cast<std::uint32_t>(m.positions.size() - 1);
        node_index.emplace(key, ix);
        return ix;
    };
    auto wall_vertex = [&](int i, int j, bool front) -> std::uint32_t {
        m.positions.push_back(node_pos(i, j, front));
        m.uvs.push_back({static_cast<float>(trim_u), static_cast<float>(trim_v)});
        return static_cast<std::uint32_t>(m.positions.size() - 1);
    };
    auto quad = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
        m.indices.insert(m.indices.end(), {a, b, c, a, c, d});
    };

    for (int j = 0; j < grid.gy; ++j) {
        for (int i = 0; i < grid.gx; ++i) {
            if (!grid.at(i, j)) continue;
            quad(node(i, j, true), node(i + 1, j, true), node(i + 1, j + 1, true),
                 node(i, j + 1, true));
            quad(node(i, j, false), node(i, j + 1, false), node(i + 1, j + 1, false),
                 node(i + 1, j, false));
            // Walls on boundary edges, textured from the trim strip.
            if (!grid.at(i, j - 1)) {
                quad(wall_vertex(i, j, true), wall_vertex(i + 1, j, true),
                     wall_vertex(i + 1, j, false), wall_vertex(i, j, false));
            }
            if (!grid.at(i, j + 1)) {
                quad(wall_vertex(i, j + 1, true), wall_vertex(i, j + 1, false),
                     wall_vertex(i + 1, j + 1, false), wall_vertex(i + 1, j + 1, true));
            }
            if (!grid.at(i - 1, j)) {
                quad(wall_vertex(i, j, true), wall_vertex(i, j, false),
                     wall_vertex(i, j + 1, false), wall_vertex(i, j + 1, true));
            }
            if (!grid.at(i + 1, j)) {
                quad(wall_vertex(i + 1, j, true), wall_vertex(i + 1, j + 1, true),
                     wall_vertex(i + 1, j + 1, false), wall_vertex(i + 1, j, false));
            }
        }
    }
    return asset;
}

// ----------------------------------------------------------- MockEmbed ----

std::vector<float> MockEmbedBackend::combine_ids(const std::set<int>& ids) const {
    std::vector<double> acc(cfg_.dim, 0.0);
    auto add_stream = [&](std::uint64_t stream_seed) {
        Rng rng(stream_seed);
        for (int i = 0; i < cfg_.dim; ++i) acc[i] += rng.next_gaussian();
    };
    if (ids.empty()) {
        add_stream(mix_seed(cfg_.seed, 0x6e6f6e65ull));  // the shared "nothing" vector
    } else {
        for (int id : ids) {
            add_stream(mix_seed(cfg_.seed, static_cast<std::uint64_t>(id) + 1000003ull));
        }
    }
    double norm = 0.0;
    for (double v : acc) norm += v * v;
    norm = std::sqrt(norm);
    std::vector<float> out(cfg_.dim);
    for (int i = 0; i < cfg_.dim; ++i) out[i] = static_cast<float>(acc[i] / norm);
    // Renormalize after the float cast so the unit-norm contract holds.
    double n2 = 0.0;
    for (float v : out) n2 += static_cast<double>(v) * v;
    double scale = 1.0 / std::sqrt(n2);
    for (float& v : out) v = static_cast<float>(v * scale);
    return out;
}

std::vector<float> MockEmbedBackend::embed_text(const std::string& text) {
    std::set<int> ids;
    for (const std::string& w : mocktok::tokenize(text)) ids.insert(mocktok::token_id(w));
    return combine_ids(ids);
}

std::vector<float> MockEmbedBackend::embed_image(const Image& img) {
    return combine_ids(mocktok::decode_tokens(img));
}

std::vector<float> MockEmbedBackend::embed_mesh(const MeshAsset& mesh) {
    RenderConfig cfg;
    cfg.width = cfg_.view_resolution;
    cfg.height = cfg_.view_resolution;
    ViewSet views = cm2i(mesh, cfg);
    std::set<int> ids;
    for (ViewName v : {ViewName::front, ViewName::back, ViewName::left, ViewName::right}) {
        std::set<int> part = mocktok::decode_tokens(views.view(v).image);
        ids.insert(part.begin(), part.end());
    }
    return combine_ids(ids);
}

// ------------------------------------------------------------- MockLmm ----

namespace {

// Template sections are delimited by known uppercase headers.
std::string extract_section(const std::string& text, const std::string& header) {
    static const std::vector<std::string> kHeaders = {"IDEA:", "FEEDBACK:", "MEMORY:"};
    std::size_t start = text.find(header);
    if (start == std::string::npos) return "";
    start += header.size();
    std::size_t end = text.size();
    for (const std::string& h : kHeaders) {
        if (h == header) continue;
        std::size_t p = text.find("\n" + h, start);
        if (p != std::string::npos) end = std::min(end, p);
    }
    // Trailing instruction lines also terminate the last section.
    for (const char* marker : {"\nWrite ", "\nIf the draft", "\nReply ", "\nPick "}) {
        std::size_t p = text.find(marker, start);
        if (p != std::string::npos) end = std::min(end, p);
    }
    std::string out = text.substr(start, end - start);
    while (!out.empty() && (out.front() == '\n' || out.front() == ' ')) out.erase(out.begin());
    while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
    return out;
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int n = 0;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

std::size_t count_images(const LmmRequest& req) {
    std::size_t n = 0;
    for (const LmmPart& p : req.parts) {
        if (p.kind == LmmPart::Kind::Image) ++n;
    }
    return n;
}

std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (const std::string& w : words) {
        if (!out.empty()) out += " ";
        out += w;
    }
    return out;
}

}  // namespace

std::string MockLmmBackend::complete(const LmmRequest& req) {
    if (req.system_prompt.find("BEST:") != std::string::npos) return answer_select(req);
    if (req.system_prompt.find("VERDICT:") != std::string::npos) return answer_feedback(req);
    if (req.system_prompt.find("CAPTION") != std::string::npos) return answer_caption(req);
    return answer_generate(req);
}

std::string MockLmmBackend::answer_generate(const LmmRequest& req) const {
    std::smatch match;
    int n = 3;
    static const std::regex n_re(R"(Write (\d+) candidate)");
    if (std::regex_search(req.system_prompt, match, n_re)) n = std::stoi(match[1]);

    std::string idea = extract_section(req.system_prompt, "IDEA:");
    std::string feedback = extract_section(req.system_prompt, "FEEDBACK:");
    std::string memory = extract_section(req.system_prompt, "MEMORY:");

    std::vector<std::string> base;
    if (feedback.empty() || feedback.find("(none") != std::string::npos) {
        base = mocktok::tokenize(idea);
    } else {
        // Start from the newest remembered prompt, then fold in whatever the
        // critique listed as missing.
        static const std::regex prompt_re(R"(\[iter \d+\] prompt: (.*?); feedback:)");
        if (std::regex_search(memory, match, prompt_re)) {
            base = mocktok::tokenize(match[1]);
        } else {
            base = mocktok::tokenize(idea);
        }
        std::size_t miss = feedback.find("missing:");
        if (miss != std::string::npos) {
            for (const std::string& w : mocktok::tokenize(feedback.substr(miss + 8))) {
                if (std::find(base.begin(), base.end(), w) == base.end()) base.push_back(w);
            }
        }
    }
    if (base.empty()) base.push_back("object");

    // Candidates differ by rotation and a short version tag the tokenizer
    // ignores, so they stay distinct without smuggling extra words in.
    std::uint64_t h = mix_seed(cfg_.seed, fnv1a64(req.system_prompt));
    std::string out;
    for (int i = 0; i < n; ++i) {
        std::vector<std::string> words = base;
        std::rotate(words.begin(),
                    words.begin() + static_cast<long>((h + i) % words.size()), words.end());
        out += std::to_string(i + 1) + ". " + join_words(words) + " v" + std::to_string(i + 1) +
               "\n";
    }
    return out;
}

std::string MockLmmBackend::answer_select(const LmmRequest& req) const {
    std::smatch match;
    int n = 1;
    static const std::regex n_re(R"((\d+) draft)");
    if (std::regex_search(req.system_prompt, match, n_re)) n = std::stoi(match[1]);

    std::uint64_t h = mix_seed(cfg_.seed, fnv1a64(req.system_prompt));
    for (const LmmPart& p : req.parts) {
        if (p.kind == LmmPart::Kind::Text) {
            h = mix_seed(h, fnv1a64(p.text));
        } else {
            h = mix_seed(h, fnv1a64(p.image.pixels()));
        }
    }
    return "BEST: " + std::to_string(h % std::max(1, n));
}

std::string MockLmmBackend::answer_feedback(const LmmRequest& req) const {
    std::string idea = extract_section(req.system_prompt, "IDEA:");
    std::string memory = extract_section(req.system_prompt, "MEMORY:");
    int iteration = count_occurrences(memory, "[iter ");

    if (!cfg_.force_refine && cfg_.accept_at_iteration >= 0 &&
        iteration >= cfg_.accept_at_iteration) {
        return "VERDICT: ACCEPT";
    }

    // Idea-side target words: directive text plus whatever the idea's own
    // images encode. The draft grid is the last attachment.
    std::vector<std::string> target = mocktok::tokenize(idea);
    std::set<int> have;
    std::size_t images = count_images(req);
    std::size_t seen = 0;
    for (const LmmPart& p : req.parts) {
        if (p.kind != LmmPart::Kind::Image) continue;
        ++seen;
        std::set<int> ids = mocktok::decode_tokens(p.image);
        if (seen == images) {
            have = ids;
        } else {
            for (int id : ids) {
                if (auto w = mocktok::word_for_id(id)) {
                    if (std::find(target.begin(), target.end(), *w) == target.end()) {
                        target.push_back(*w);
                    }
                }
            }
        }
    }

    std::vector<std::string> missing;
    for (const std::string& w : target) {
        if (!have.count(mocktok::token_id(w))) missing.push_back(w);
    }

    if (missing.empty() && !cfg_.force_refine && cfg_.accept_at_iteration < 0) {
        return "VERDICT: ACCEPT";
    }
    if (missing.empty()) {
        return "VERDICT: REFINE\nno specific gaps found; keep the current direction";
    }
    return "VERDICT: REFINE\nmissing: " + join_words(missing);
}

std::string MockLmmBackend::answer_caption(const LmmRequest& req) const {
    std::string idea = extract_section(req.system_prompt, "IDEA:");
    std::vector<std::string> words = mocktok::tokenize(idea);
    std::set<std::string> extra;
    for (const LmmPart& p : req.parts) {
        if (p.kind != LmmPart::Kind::Image) continue;
        for (int id : mocktok::decode_tokens(p.image)) {
            if (auto w = mocktok::word_for_id(id)) {
                if (std::find(words.begin(), words.end(), *w) == words.end()) extra.insert(*w);
            }
        }
    }
    // Single-pass captioning compresses: only the first unseen visual detail
    // makes it into the caption, which is what the refinement loop later
    // recovers iteratively.
    if (!extra.empty()) words.push_back(*extra.begin());
    if (words.empty()) words.push_back("object");
    return join_words(words);
}

std::string ScriptedLmmBackend::complete(const LmmRequest&) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (next_ >= replies_.size()) {
        throw TransportError("lmm", "scripted transcript exhausted after " +
                                        std::to_string(replies_.size()) + " replies");
    }
    return replies_[next_++];
}

GatewayBackends make_mock_backends(std::uint64_t seed, MockLmmConfig lmm_cfg) {
    lmm_cfg.seed = mix_seed(seed, 0x11u);
    GatewayBackends b;
    b.lmm = std::make_shared<MockLmmBackend>(lmm_cfg);
    b.t2i = std::make_shared<MockT2iBackend>();
    b.i23d = std::make_shared<MockI23dBackend>();
    MockEmbedConfig ec;
    ec.seed = mix_seed(seed, 0x22u);
    b.embed = std::make_shared<MockEmbedBackend>(ec);
    return b;
}

}  // namespace idea23d
