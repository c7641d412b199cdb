#pragma once

// Shared geometry and raster fixtures for the test suites.

#include <cmath>
#include <vector>

#include "idea23d/image.hpp"
#include "idea23d/mesh.hpp"
#include "idea23d/util.hpp"

namespace fixtures {

using idea23d::Image;
using idea23d::MeshAsset;
using idea23d::Rgba;
using idea23d::TriangleMesh;
using idea23d::Vec2;
using idea23d::Vec3;

inline MeshAsset cube(float half = 1.0f) {
    MeshAsset a;
    a.id = "cube";
    TriangleMesh& m = a.geometry;
    const float s = half;
    m.positions = {{-s, -s, -s}, {s, -s, -s}, {s, s, -s}, {-s, s, -s},
                   {-s, -s, s},  {s, -s, s},  {s, s, s},  {-s, s, s}};
    auto quad = [&m](int a0, int b, int c, int d) {
        m.indices.insert(m.indices.end(),
                         {static_cast<std::uint32_t>(a0), static_cast<std::uint32_t>(b),
                          static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(a0),
                          static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(d)});
    };
    quad(0, 1, 2, 3);  // -z
    quad(4, 7, 6, 5);  // +z
    quad(0, 4, 5, 1);  // -y
    quad(3, 2, 6, 7);  // +y
    quad(0, 3, 7, 4);  // -x
    quad(1, 5, 6, 2);  // +x
    return a;
}

inline MeshAsset quad_facing_z(bool with_texture) {
    MeshAsset a;
    a.id = with_texture ? "texquad" : "quad";
    TriangleMesh& m = a.geometry;
    m.positions = {{-1, -1, 0}, {1, -1, 0}, {1, 1, 0}, {-1, 1, 0}};
    m.uvs = {{0, 1}, {1, 1}, {1, 0}, {0, 0}};
    m.indices = {0, 1, 2, 0, 2, 3};
    if (with_texture) {
        Image tex(32, 32);
        for (int y = 0; y < 32; ++y) {
            for (int x = 0; x < 32; ++x) {
                bool check = ((x / 4) + (y / 4)) % 2 == 0;
                tex.set(x, y, check ? Rgba{208, 64, 32, 255} : Rgba{32, 128, 208, 255});
            }
        }
        a.texture = tex;
    } else {
        m.uvs.clear();
    }
    return a;
}

inline MeshAsset uv_sphere(int stacks = 10, int slices = 16) {
    MeshAsset a;
    a.id = "sphere";
    TriangleMesh& m = a.geometry;
    for (int i = 0; i <= stacks; ++i) {
        double phi = 3.14159265358979323846 * i / stacks;
        for (int j = 0; j <= slices; ++j) {
            double theta = 2.0 * 3.14159265358979323846 * j / slices;
            m.positions.push_back({static_cast<float>(std::sin(phi) * std::cos(theta)),
                                   static_cast<float>(std::cos(phi)),
                                   static_cast<float>(std::sin(phi) * std::sin(theta))});
        }
    }
    auto at = [&](int i, int j) { return static_cast<std::uint32_t>(i * (slices + 1) + j); };
    for (int i = 0; i < stacks; ++i) {
        for (int j = 0; j < slices; ++j) {
            m.indices.insert(m.indices.end(), {at(i, j), at(i + 1, j), at(i + 1, j + 1)});
            m.indices.insert(m.indices.end(), {at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    }
    return a;
}

// Non-convex L cross-section extruded along z.
inline MeshAsset l_shape() {
    MeshAsset a;
    a.id = "lshape";
    TriangleMesh& m = a.geometry;
    // L polygon in xy (counter-clockwise), z in {0, 0.4}
    const std::vector<std::pair<float, float>> outline = {
        {0, 0}, {1, 0}, {1, 0.4f}, {0.4f, 0.4f}, {0.4f, 1}, {0, 1}};
    const float depth = 0.4f;
    for (int layer = 0; layer < 2; ++layer) {
        for (auto [x, y] : outline) {
            m.positions.push_back({x, y, layer == 0 ? 0.0f : depth});
        }
    }
    // Fan triangulations of the two L faces (split into two rectangles).
    auto tri = [&m](int a0, int b, int c) {
        m.indices.insert(m.indices.end(),
                         {static_cast<std::uint32_t>(a0), static_cast<std::uint32_t>(b),
                          static_cast<std::uint32_t>(c)});
    };
    // front face (z=0): rect (0,1,2,3) + rect (0,3,4,5)
    tri(0, 1, 2);
    tri(0, 2, 3);
    tri(0, 3, 4);
    tri(0, 4, 5);
    // back face
    tri(6, 8, 7);
    tri(6, 9, 8);
    tri(6, 10, 9);
    tri(6, 11, 10);
    // side walls
    for (int i = 0; i < 6; ++i) {
        int j = (i + 1) % 6;
        tri(i, j, 6 + j);
        tri(i, 6 + j, 6 + i);
    }
    return a;
}

inline Image disk_image(int size, int radius, Rgba fg, Rgba bg) {
    Image img(size, size, bg);
    int c = size / 2;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            long dx = x - c, dy = y - c;
            if (dx * dx + dy * dy <= static_cast<long>(radius) * radius) img.set(x, y, fg);
        }
    }
    return img;
}

inline Image random_image(idea23d::Rng& rng, int w, int h) {
    Image img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            img.set(x, y,
                    {static_cast<std::uint8_t>(rng.next_below(256)),
                     static_cast<std::uint8_t>(rng.next_below(256)),
                     static_cast<std::uint8_t>(rng.next_below(256)), 255});
        }
    }
    return img;
}

// Random triangle soup with finite coordinates; useful for property tests.
inline MeshAsset random_mesh(idea23d::Rng& rng, int tris) {
    MeshAsset a;
    a.id = "random";
    for (int t = 0; t < tris; ++t) {
        for (int k = 0; k < 3; ++k) {
            a.geometry.positions.push_back({static_cast<float>(rng.next_double() * 2 - 1),
                                            static_cast<float>(rng.next_double() * 2 - 1),
                                            static_cast<float>(rng.next_double() * 2 - 1)});
            a.geometry.indices.push_back(static_cast<std::uint32_t>(t * 3 + k));
        }
    }
    return a;
}

}  // namespace fixtures
