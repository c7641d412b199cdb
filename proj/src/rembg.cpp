#include "idea23d/rembg.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <vector>

#include "idea23d/errors.hpp"

namespace idea23d {

namespace {

// 3x3 median per RGB channel with clamped borders.
Image median3(const Image& img) {
    Image out(img.width(), img.height());
    std::array<std::uint8_t, 9> window;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            Rgba c{0, 0, 0, img.at(x, y).a};
            for (int ch = 0; ch < 3; ++ch) {
                int k = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        int sx = std::clamp(x + dx, 0, img.width() - 1);
                        int sy = std::clamp(y + dy, 0, img.height() - 1);
                        Rgba s = img.at(sx, sy);
                        window[k++] = ch == 0 ? s.r : (ch == 1 ? s.g : s.b);
                    }
                }
                std::nth_element(window.begin(), window.begin() + 4, window.end());
                std::uint8_t med = window[4];
                if (ch == 0) c.r = med;
                else if (ch == 1) c.g = med;
                else c.b = med;
            }
            out.set(x, y, c);
        }
    }
    return out;
}

}  // namespace

Image remove_background(const Image& img, const RembgConfig& cfg) {
    if (img.empty()) throw ValidationError("empty image");

    const std::size_t total = static_cast<std::size_t>(img.width()) * img.height();
    std::size_t transparent = 0;
    for (std::size_t i = 3; i < img.pixels().size(); i += 4) {
        if (img.pixels()[i] == 0) ++transparent;
    }
    if (static_cast<double>(transparent) >= cfg.prematted_fraction * static_cast<double>(total)) {
        return img;  // pre-matted, pass through
    }

    Image filtered = median3(img);

    // Corner-region mean over the four 3x3 corner patches.
    long sum_r = 0, sum_g = 0, sum_b = 0;
    int count = 0;
    const int cw = std::min(3, img.width());
    const int ch = std::min(3, img.height());
    const std::array<std::pair<int, int>, 4> corners = {{{0, 0},
                                                         {img.width() - cw, 0},
                                                         {0, img.height() - ch},
                                                         {img.width() - cw, img.height() - ch}}};
    for (auto [ox, oy] : corners) {
        for (int y = oy; y < oy + ch; ++y) {
            for (int x = ox; x < ox + cw; ++x) {
                Rgba c = filtered.at(x, y);
                sum_r += c.r;
                sum_g += c.g;
                sum_b += c.b;
                ++count;
            }
        }
    }
    const int mean_r = static_cast<int>(sum_r / count);
    const int mean_g = static_cast<int>(sum_g / count);
    const int mean_b = static_cast<int>(sum_b / count);

    auto is_background_like = [&](int x, int y) {
        Rgba c = filtered.at(x, y);
        return std::abs(c.r - mean_r) <= cfg.tolerance &&
               std::abs(c.g - mean_g) <= cfg.tolerance &&
               std::abs(c.b - mean_b) <= cfg.tolerance;
    };

    std::vector<std::uint8_t> background(total, 0);
    std::vector<std::pair<int, int>> stack;
    auto push = [&](int x, int y) {
        std::size_t ix = static_cast<std::size_t>(y) * img.width() + x;
        if (!background[ix] && is_background_like(x, y)) {
            background[ix] = 1;
            stack.emplace_back(x, y);
        }
    };
    push(0, 0);
    push(img.width() - 1, 0);
    push(0, img.height() - 1);
    push(img.width() - 1, img.height() - 1);
    while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        if (x > 0) push(x - 1, y);
        if (x + 1 < img.width()) push(x + 1, y);
        if (y > 0) push(x, y - 1);
        if (y + 1 < img.height()) push(x, y + 1);
    }

    Image out = img;
    std::size_t foreground = 0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            std::size_t ix = static_cast<std::size_t>(y) * img.width() + x;
            if (background[ix]) {
                Rgba c = out.at(x, y);
                c.a = 0;
                out.set(x, y, c);
            } else if (out.at(x, y).a > 0) {
                ++foreground;
            }
        }
    }
    if (foreground == 0) throw EmptyForeground();
    return out;
}

}  // namespace idea23d
