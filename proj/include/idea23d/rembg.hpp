#pragma once

#include "idea23d/image.hpp"

namespace idea23d {

struct RembgConfig {
    // Per-channel distance to the corner-region mean that still counts as
    // background during the flood fill.
    int tolerance = 12;
    // Images already carrying at least this fraction of transparent pixels
    // are treated as pre-matted and returned unchanged.
    double prematted_fraction = 0.05;
};

// Heuristic matting: median-filters the image, flood-fills from the four
// corners over pixels close to the corner-region mean color, and clears the
// alpha of everything reached. Foreground pixels keep their original color.
// Throws EmptyForeground when nothing survives.
Image remove_background(const Image& img, const RembgConfig& cfg = {});

}  // namespace idea23d
