#include <doctest.h>

#include "fixtures.hpp"
#include "idea23d/errors.hpp"
#include "idea23d/rembg.hpp"

using namespace idea23d;

TEST_SUITE("rembg") {

TEST_CASE("red disk on white matches the analytic mask within 1%") {
    const int size = 256, radius = 80;
    Image img = fixtures::disk_image(size, radius, {200, 30, 30, 255}, {255, 255, 255, 255});
    Image out = remove_background(img);
    REQUIRE(out.width() == size);
    REQUIRE(out.height() == size);

    int c = size / 2;
    std::size_t disagree = 0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            long dx = x - c, dy = y - c;
            bool inside = dx * dx + dy * dy <= static_cast<long>(radius) * radius;
            bool kept = out.at(x, y).a > 0;
            if (inside != kept) ++disagree;
        }
    }
    CHECK(disagree <= static_cast<std::size_t>(size) * size / 100);
    // Foreground colors are untouched.
    CHECK(out.at(c, c) == Rgba{200, 30, 30, 255});
}

TEST_CASE("fully uniform image leaves no foreground") {
    Image img(64, 64, {220, 220, 220, 255});
    CHECK_THROWS_AS(remove_background(img), EmptyForeground);
}

TEST_CASE("pre-matted images pass through unchanged") {
    Image img = fixtures::disk_image(64, 20, {10, 200, 10, 255}, {0, 0, 0, 0});
    Image out = remove_background(img);
    CHECK(out == img);
}

TEST_CASE("background within tolerance of the corner mean is removed despite noise") {
    Rng rng(77);
    Image img(128, 128);
    for (int y = 0; y < 128; ++y) {
        for (int x = 0; x < 128; ++x) {
            // background 240 +/- 3 of noise, flattened by the median filter
            std::uint8_t n = static_cast<std::uint8_t>(237 + rng.next_below(7));
            img.set(x, y, {n, n, n, 255});
        }
    }
    for (int y = 40; y < 88; ++y) {
        for (int x = 40; x < 88; ++x) {
            img.set(x, y, {20, 60, 200, 255});
        }
    }
    Image out = remove_background(img);
    CHECK(out.at(64, 64).a == 255);
    CHECK(out.at(2, 2).a == 0);
    CHECK(out.at(125, 125).a == 0);
}

}  // TEST_SUITE
