#pragma once

#include <cstdint>
#include <vector>

#include "docforge/geometry.hpp"

namespace docforge {

/// Interleaved 8-bit RGB raster, row-major, pixel (x, y) at (y * width + x) * 3.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    static Image filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);

    void fill_rect(const Box& box, std::uint8_t r, std::uint8_t g, std::uint8_t b);

    std::uint8_t channel(int x, int y, int c) const { return rgb[(std::size_t(y) * width + x) * 3 + c]; }
};

/// Bilinear resample of the crop region to patch_size x patch_size, channels
/// scaled to [0, 1], flattened (y * P + x) * 3 + c. Sample positions use
/// half-pixel centers: src = lo + (i + 0.5) * extent / P - 0.5, clamped to the
/// image, so a crop of exactly P x P pixels copies them through unchanged.
std::vector<float> extract_crop(const Image& image, const Box& crop, int patch_size);

}  // namespace docforge
