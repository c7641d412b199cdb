#include "idea23d/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cstring>

#include "idea23d/errors.hpp"
#include "idea23d/util.hpp"

namespace idea23d {

Image::Image(int width, int height, Rgba fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw ValidationError("negative image dimensions");
    pixels_.resize(static_cast<std::size_t>(width) * height * 4);
    this->fill(fill);
}

void Image::fill(Rgba c) {
    for (std::size_t i = 0; i + 3 < pixels_.size(); i += 4) {
        pixels_[i] = c.r;
        pixels_[i + 1] = c.g;
        pixels_[i + 2] = c.b;
        pixels_[i + 3] = c.a;
    }
}

void Image::blit(const Image& src, int x, int y) {
    int x0 = std::max(0, -x);
    int y0 = std::max(0, -y);
    int x1 = std::min(src.width(), width_ - x);
    int y1 = std::min(src.height(), height_ - y);
    for (int sy = y0; sy < y1; ++sy) {
        const std::uint8_t* s = &src.pixels_[src.idx(x0, sy)];
        std::uint8_t* d = &pixels_[idx(x + x0, y + sy)];
        std::memcpy(d, s, static_cast<std::size_t>(x1 - x0) * 4);
    }
}

Image Image::crop(int x, int y, int w, int h) const {
    if (x < 0 || y < 0 || w < 0 || h < 0 || x + w > width_ || y + h > height_) {
        throw ValidationError("crop rectangle out of bounds");
    }
    Image out(w, h);
    for (int row = 0; row < h; ++row) {
        std::memcpy(&out.pixels_[out.idx(0, row)], &pixels_[idx(x, y + row)],
                    static_cast<std::size_t>(w) * 4);
    }
    return out;
}

Image Image::resized_nearest(int w, int h) const {
    Image out(w, h);
    for (int y = 0; y < h; ++y) {
        int sy = static_cast<int>((static_cast<std::int64_t>(y) * height_) / h);
        for (int x = 0; x < w; ++x) {
            int sx = static_cast<int>((static_cast<std::int64_t>(x) * width_) / w);
            out.set(x, y, at(sx, sy));
        }
    }
    return out;
}

std::string Image::content_digest() const {
    std::vector<std::uint8_t> buf;
    buf.reserve(pixels_.size() + 8);
    auto push32 = [&buf](std::uint32_t v) {
        buf.push_back(v & 0xff);
        buf.push_back((v >> 8) & 0xff);
        buf.push_back((v >> 16) & 0xff);
        buf.push_back((v >> 24) & 0xff);
    };
    push32(static_cast<std::uint32_t>(width_));
    push32(static_cast<std::uint32_t>(height_));
    buf.insert(buf.end(), pixels_.begin(), pixels_.end());
    return sha256_hex(buf);
}

namespace {

struct PngReadCtx {
    const std::vector<std::uint8_t>* bytes;
    std::size_t offset;
};

void png_read_cb(png_structp png, png_bytep out, png_size_t count) {
    auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
    if (ctx->offset + count > ctx->bytes->size()) {
        png_error(png, "unexpected end of PNG data");
    }
    std::memcpy(out, ctx->bytes->data() + ctx->offset, count);
    ctx->offset += count;
}

void png_write_cb(png_structp png, png_bytep data, png_size_t count) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + count);
}

void png_flush_cb(png_structp) {}

}  // namespace

Image decode_png(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        throw IoError("not a PNG stream");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }

    std::vector<std::uint8_t> raster;
    std::vector<png_bytep> rows;
    int width = 0;
    int height = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("PNG decode failed");
    }

    PngReadCtx ctx{&bytes, 0};
    png_set_read_fn(png, &ctx, png_read_cb);
    png_read_info(png, info);

    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    int color_type = png_get_color_type(png, info);
    int bit_depth = png_get_bit_depth(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
    png_read_update_info(png, info);

    if (png_get_rowbytes(png, info) != static_cast<std::size_t>(width) * 4) {
        png_error(png, "unexpected row stride after expansion");
    }

    raster.resize(static_cast<std::size_t>(width) * height * 4);
    rows.resize(height);
    for (int y = 0; y < height; ++y) {
        rows[y] = raster.data() + static_cast<std::size_t>(y) * width * 4;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(width, height);
    img.pixels() = std::move(raster);
    return img;
}

std::vector<std::uint8_t> encode_png(const Image& img) {
    if (img.empty()) throw ValidationError("cannot encode empty image");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }

    std::vector<std::uint8_t> out;
    std::vector<png_const_bytep> rows(img.height());
    for (int y = 0; y < img.height(); ++y) {
        rows[y] = img.pixels().data() + static_cast<std::size_t>(y) * img.width() * 4;
    }

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encode failed");
    }

    png_set_write_fn(png, &out, png_write_cb, png_flush_cb);
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
                 static_cast<png_uint_32>(img.height()), 8, PNG_COLOR_TYPE_RGB_ALPHA,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height(); ++y) {
        png_write_row(png, const_cast<png_bytep>(rows[y]));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

Image load_png(const std::string& path) {
    std::string data = read_file(path);
    std::vector<std::uint8_t> bytes(data.begin(), data.end());
    try {
        return decode_png(bytes);
    } catch (const IoError& e) {
        throw IoError(std::string(e.what()) + ": " + path);
    }
}

void save_png(const Image& img, const std::string& path) {
    write_file(path, encode_png(img));
}

namespace {

// 5x7 glyphs, one byte per row, bit 4 = leftmost column.
struct Glyph {
    char c;
    std::array<std::uint8_t, 7> rows;
};

constexpr Glyph kFont[] = {
    {' ', {0, 0, 0, 0, 0, 0, 0}},
    {'a', {0b00000, 0b00000, 0b01110, 0b00001, 0b01111, 0b10001, 0b01111}},
    {'b', {0b10000, 0b10000, 0b10110, 0b11001, 0b10001, 0b11001, 0b10110}},
    {'c', {0b00000, 0b00000, 0b01110, 0b10000, 0b10000, 0b10001, 0b01110}},
    {'d', {0b00001, 0b00001, 0b01101, 0b10011, 0b10001, 0b10011, 0b01101}},
    {'e', {0b00000, 0b00000, 0b01110, 0b10001, 0b11111, 0b10000, 0b01110}},
    {'f', {0b00110, 0b01001, 0b01000, 0b11100, 0b01000, 0b01000, 0b01000}},
    {'g', {0b00000, 0b01111, 0b10001, 0b10001, 0b01111, 0b00001, 0b01110}},
    {'h', {0b10000, 0b10000, 0b10110, 0b11001, 0b10001, 0b10001, 0b10001}},
    {'i', {0b00100, 0b00000, 0b01100, 0b00100, 0b00100, 0b00100, 0b01110}},
    {'j', {0b00010, 0b00000, 0b00110, 0b00010, 0b00010, 0b10010, 0b01100}},
    {'k', {0b10000, 0b10000, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010}},
    {'l', {0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}},
    {'m', {0b00000, 0b00000, 0b11010, 0b10101, 0b10101, 0b10101, 0b10101}},
    {'n', {0b00000, 0b00000, 0b10110, 0b11001, 0b10001, 0b10001, 0b10001}},
    {'o', {0b00000, 0b00000, 0b01110, 0b10001, 0b10001, 0b10001, 0b01110}},
    {'p', {0b00000, 0b00000, 0b11110, 0b10001, 0b11110, 0b10000, 0b10000}},
    {'q', {0b00000, 0b00000, 0b01111, 0b10001, 0b01111, 0b00001, 0b00001}},
    {'r', {0b00000, 0b00000, 0b10110, 0b11001, 0b10000, 0b10000, 0b10000}},
    {'s', {0b00000, 0b00000, 0b01111, 0b10000, 0b01110, 0b00001, 0b11110}},
    {'t', {0b01000, 0b01000, 0b11110, 0b01000, 0b01000, 0b01001, 0b00110}},
    {'u', {0b00000, 0b00000, 0b10001, 0b10001, 0b10001, 0b10011, 0b01101}},
    {'v', {0b00000, 0b00000, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100}},
    {'w', {0b00000, 0b00000, 0b10001, 0b10001, 0b10101, 0b10101, 0b01010}},
    {'x', {0b00000, 0b00000, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001}},
    {'y', {0b00000, 0b00000, 0b10001, 0b10001, 0b01111, 0b00001, 0b01110}},
    {'z', {0b00000, 0b00000, 0b11111, 0b00010, 0b00100, 0b01000, 0b11111}},
    {'0', {0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110}},
    {'1', {0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}},
    {'2', {0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111}},
    {'3', {0b01110, 0b10001, 0b00001, 0b00110, 0b00001, 0b10001, 0b01110}},
    {'4', {0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010}},
    {'5', {0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110}},
    {'6', {0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110}},
    {'7', {0b11111, 0b00001, 0b00010, 0b00100, 0b00100, 0b00100, 0b00100}},
    {'8', {0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110}},
    {'9', {0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100}},
};

const std::array<std::uint8_t, 7>* find_glyph(char c) {
    for (const auto& g : kFont) {
        if (g.c == c) return &g.rows;
    }
    return nullptr;
}

}  // namespace

void draw_text(Image& img, const std::string& text, int x, int y, int scale, Rgba color) {
    int cursor = x;
    for (char raw : text) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
        const auto* rows = find_glyph(c);
        if (rows) {
            for (int gy = 0; gy < 7; ++gy) {
                for (int gx = 0; gx < 5; ++gx) {
                    if (((*rows)[gy] >> (4 - gx)) & 1) {
                        for (int dy = 0; dy < scale; ++dy) {
                            for (int dx = 0; dx < scale; ++dx) {
                                int px = cursor + gx * scale + dx;
                                int py = y + gy * scale + dy;
                                if (px >= 0 && px < img.width() && py >= 0 && py < img.height()) {
                                    img.set(px, py, color);
                                }
                            }
                        }
                    }
                }
            }
        }
        cursor += 6 * scale;  // 5 columns + 1 spacing
    }
}

int text_width(const std::string& text, int scale) {
    if (text.empty()) return 0;
    return static_cast<int>(text.size()) * 6 * scale - scale;
}

}  // namespace idea23d
