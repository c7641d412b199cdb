#pragma once

// Independent per-pixel oracle for the six-view renderer, written against
// the documented geometry contract only (normalization, camera table, 1/16
// pixel quantization, flat shading, nearest texel). For an orthographic
// camera a ray through a pixel center reduces to a 2D containment test plus
// depth ordering, evaluated here per pixel over every triangle.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "idea23d/image.hpp"
#include "idea23d/mesh.hpp"
#include "idea23d/render.hpp"

namespace oracle {

struct Basis {
    int fwd_axis, fwd_sign, right_axis, right_sign, up_axis, up_sign;
};

inline Basis basis_for(idea23d::ViewName v) {
    using idea23d::ViewName;
    switch (v) {
        case ViewName::front:  return {2, -1, 0, +1, 1, +1};
        case ViewName::back:   return {2, +1, 0, -1, 1, +1};
        case ViewName::right:  return {0, -1, 2, -1, 1, +1};
        case ViewName::left:   return {0, +1, 2, +1, 1, +1};
        case ViewName::top:    return {1, -1, 0, -1, 2, +1};
        case ViewName::bottom: return {1, +1, 0, +1, 2, +1};
    }
    return {2, -1, 0, +1, 1, +1};
}

inline idea23d::Image render_view(const idea23d::MeshAsset& mesh,
                                  const idea23d::RenderConfig& cfg, idea23d::ViewName view) {
    using idea23d::Image;
    using idea23d::Rgba;
    using idea23d::Vec3;

    const auto& m = mesh.geometry;
    double mn[3] = {1e300, 1e300, 1e300};
    double mx[3] = {-1e300, -1e300, -1e300};
    for (const Vec3& p : m.positions) {
        double c[3] = {p.x, p.y, p.z};
        for (int a = 0; a < 3; ++a) {
            mn[a] = std::min(mn[a], c[a]);
            mx[a] = std::max(mx[a], c[a]);
        }
    }
    double extent = std::max({mx[0] - mn[0], mx[1] - mn[1], mx[2] - mn[2]});
    double center[3] = {(mn[0] + mx[0]) / 2, (mn[1] + mx[1]) / 2, (mn[2] + mx[2]) / 2};

    double scale = (1.0 - 2.0 * cfg.margin_fraction) * std::min(cfg.width, cfg.height);
    std::vector<std::array<double, 3>> pos(m.positions.size());
    std::vector<std::array<long long, 3>> q(m.positions.size());
    for (std::size_t i = 0; i < m.positions.size(); ++i) {
        double c[3] = {m.positions[i].x, m.positions[i].y, m.positions[i].z};
        for (int a = 0; a < 3; ++a) {
            pos[i][a] = (c[a] - center[a]) / extent;
            q[i][a] = std::llround(16.0 * scale * pos[i][a]);
        }
    }

    Basis b = basis_for(view);
    const long long c16x = static_cast<long long>(cfg.width) * 8;
    const long long c16y = static_cast<long long>(cfg.height) * 8;

    Image img(cfg.width, cfg.height, {0, 0, 0, 0});
    std::vector<double> zbuf(static_cast<std::size_t>(cfg.width) * cfg.height,
                             std::numeric_limits<double>::infinity());

    const bool textured = m.has_uvs() && mesh.texture && !mesh.texture->empty();

    for (int py = 0; py < cfg.height; ++py) {
        double cy = py * 16.0 + 8.0;
        for (int px = 0; px < cfg.width; ++px) {
            double cx = px * 16.0 + 8.0;
            for (std::size_t t = 0; t * 3 < m.indices.size(); ++t) {
                std::uint32_t i0 = m.indices[t * 3];
                std::uint32_t i1 = m.indices[t * 3 + 1];
                std::uint32_t i2 = m.indices[t * 3 + 2];
                double sx[3], sy[3], d[3];
                std::uint32_t vi[3] = {i0, i1, i2};
                for (int k = 0; k < 3; ++k) {
                    sx[k] = static_cast<double>(c16x + b.right_sign * q[vi[k]][b.right_axis]);
                    sy[k] = static_cast<double>(c16y - b.up_sign * q[vi[k]][b.up_axis]);
                    d[k] = b.fwd_sign * pos[vi[k]][b.fwd_axis];
                }
                double area2 = (sx[1] - sx[0]) * (sy[2] - sy[0]) -
                               (sy[1] - sy[0]) * (sx[2] - sx[0]);
                if (area2 == 0) continue;
                double flip = area2 < 0 ? -1.0 : 1.0;
                double w0 = flip * ((sx[2] - sx[1]) * (cy - sy[1]) -
                                    (sy[2] - sy[1]) * (cx - sx[1]));
                double w1 = flip * ((sx[0] - sx[2]) * (cy - sy[2]) -
                                    (sy[0] - sy[2]) * (cx - sx[2]));
                double w2 = flip * ((sx[1] - sx[0]) * (cy - sy[0]) -
                                    (sy[1] - sy[0]) * (cx - sx[0]));
                if (w0 < 0 || w1 < 0 || w2 < 0) continue;
                double wsum = w0 + w1 + w2;
                double depth = (w0 * d[0] + w1 * d[1] + w2 * d[2]) / wsum;
                std::size_t pix = static_cast<std::size_t>(py) * cfg.width + px;
                if (!(depth < zbuf[pix])) continue;
                zbuf[pix] = depth;

                // Flat shading from the world-space face normal.
                double e1[3], e2[3];
                for (int a = 0; a < 3; ++a) {
                    e1[a] = pos[i1][a] - pos[i0][a];
                    e2[a] = pos[i2][a] - pos[i0][a];
                }
                double n[3] = {e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2],
                               e1[0] * e2[1] - e1[1] * e2[0]};
                double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
                double nf = len > 0 ? std::abs(n[b.fwd_axis]) / len : 0.0;
                int intensity = static_cast<int>(
                    std::clamp<long long>(std::llround(nf * 256.0), 64, 256));

                Rgba base{200, 200, 200, 255};
                if (textured) {
                    double u = (w0 * m.uvs[i0].u + w1 * m.uvs[i1].u + w2 * m.uvs[i2].u) / wsum;
                    double v = (w0 * m.uvs[i0].v + w1 * m.uvs[i1].v + w2 * m.uvs[i2].v) / wsum;
                    const Image& tex = *mesh.texture;
                    int tx = std::clamp(static_cast<int>(std::floor(u * tex.width())), 0,
                                        tex.width() - 1);
                    int ty = std::clamp(static_cast<int>(std::floor(v * tex.height())), 0,
                                        tex.height() - 1);
                    Rgba texel = tex.at(tx, ty);
                    int a = texel.a;
                    base = {static_cast<std::uint8_t>((texel.r * a + base.r * (255 - a)) / 255),
                            static_cast<std::uint8_t>((texel.g * a + base.g * (255 - a)) / 255),
                            static_cast<std::uint8_t>((texel.b * a + base.b * (255 - a)) / 255),
                            255};
                }
                auto shade = [&](std::uint8_t c) {
                    return static_cast<std::uint8_t>((c * intensity + 128) >> 8);
                };
                img.set(px, py, {shade(base.r), shade(base.g), shade(base.b), 255});
            }
        }
    }
    return img;
}

// Fraction of pixels whose channels all agree within `tol` intensity levels.
inline double agreement(const idea23d::Image& a, const idea23d::Image& b, int tol = 1) {
    if (a.width() != b.width() || a.height() != b.height()) return 0.0;
    std::size_t ok = 0, total = static_cast<std::size_t>(a.width()) * a.height();
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            idea23d::Rgba ca = a.at(x, y), cb = b.at(x, y);
            if (std::abs(ca.r - cb.r) <= tol && std::abs(ca.g - cb.g) <= tol &&
                std::abs(ca.b - cb.b) <= tol && std::abs(ca.a - cb.a) <= tol) {
                ++ok;
            }
        }
    }
    return static_cast<double>(ok) / static_cast<double>(total);
}

}  // namespace oracle
