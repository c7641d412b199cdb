#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace idea23d {

struct Rgba {
    std::uint8_t r = 0, g = 0, b = 0, a = 0;

    bool operator==(const Rgba&) const = default;
};

// 8-bit RGBA raster, row-major, top-left origin. The one canonical raster
// type used across rendering, background removal and the gateway.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgba fill = {0, 0, 0, 0});

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return width_ == 0 || height_ == 0; }

    Rgba at(int x, int y) const {
        const std::uint8_t* p = &pixels_[idx(x, y)];
        return {p[0], p[1], p[2], p[3]};
    }
    void set(int x, int y, Rgba c) {
        std::uint8_t* p = &pixels_[idx(x, y)];
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
        p[3] = c.a;
    }

    const std::vector<std::uint8_t>& pixels() const { return pixels_; }
    std::vector<std::uint8_t>& pixels() { return pixels_; }

    void fill(Rgba c);
    // Copies `src` with its top-left corner at (x, y); source pixels replace
    // destination pixels verbatim (no blending). Out-of-frame parts clipped.
    void blit(const Image& src, int x, int y);
    Image crop(int x, int y, int w, int h) const;
    // Nearest-neighbor resize.
    Image resized_nearest(int w, int h) const;

    bool operator==(const Image& other) const = default;

    std::string content_digest() const;  // sha256 over (w, h, pixels)

private:
    std::size_t idx(int x, int y) const {
        return (static_cast<std::size_t>(y) * width_ + x) * 4;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

// PNG I/O. Any 8/16-bit gray/palette/RGB/RGBA PNG decodes to RGBA8 with
// opaque alpha where the source has none. Encoding always writes RGBA8.
std::vector<std::uint8_t> encode_png(const Image& img);
Image decode_png(const std::vector<std::uint8_t>& bytes);  // throws IoError
Image load_png(const std::string& path);
void save_png(const Image& img, const std::string& path);

// 5x7 bitmap glyphs (lowercase letters, digits, space), drawn at an integer
// scale. Supported characters only; others render as blanks.
void draw_text(Image& img, const std::string& text, int x, int y, int scale, Rgba color);
int text_width(const std::string& text, int scale);
constexpr int kGlyphHeight = 7;

}  // namespace idea23d
