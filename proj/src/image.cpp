#include "docforge/image.hpp"

#include <algorithm>
#include <cmath>

#include "docforge/error.hpp"

namespace docforge {

Image Image::filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    Image img;
    img.width = width;
    img.height = height;
    img.rgb.resize(std::size_t(width) * height * 3);
    for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
        img.rgb[i] = r;
        img.rgb[i + 1] = g;
        img.rgb[i + 2] = b;
    }
    return img;
}

void Image::fill_rect(const Box& box, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const int x0 = std::clamp(static_cast<int>(std::floor(box.x0)), 0, width);
    const int y0 = std::clamp(static_cast<int>(std::floor(box.y0)), 0, height);
    const int x1 = std::clamp(static_cast<int>(std::ceil(box.x1)), 0, width);
    const int y1 = std::clamp(static_cast<int>(std::ceil(box.y1)), 0, height);
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const std::size_t at = (std::size_t(y) * width + x) * 3;
            rgb[at] = r;
            rgb[at + 1] = g;
            rgb[at + 2] = b;
        }
    }
}

std::vector<float> extract_crop(const Image& image, const Box& crop, int patch_size) {
    if (patch_size <= 0) {
        throw InvalidInput("extract_crop: patch size must be positive");
    }
    if (crop.width() <= 0.0 || crop.height() <= 0.0) {
        throw InvalidInput("extract_crop: crop box has no area");
    }
    const Box page{0.0, 0.0, double(image.width), double(image.height)};
    if (!page.contains(crop)) {
        throw InvalidInput("extract_crop: crop box outside the image");
    }
    const int P = patch_size;
    std::vector<float> out(std::size_t(3) * P * P);
    const double sx = crop.width() / P;
    const double sy = crop.height() / P;
    for (int oy = 0; oy < P; ++oy) {
        const double fy = crop.y0 + (oy + 0.5) * sy - 0.5;
        const double cy = std::clamp(fy, 0.0, double(image.height - 1));
        const int y0 = static_cast<int>(std::floor(cy));
        const int y1 = std::min(y0 + 1, image.height - 1);
        const double wy = cy - y0;
        for (int ox = 0; ox < P; ++ox) {
            const double fx = crop.x0 + (ox + 0.5) * sx - 0.5;
            const double cx = std::clamp(fx, 0.0, double(image.width - 1));
            const int x0 = static_cast<int>(std::floor(cx));
            const int x1 = std::min(x0 + 1, image.width - 1);
            const double wx = cx - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = (1.0 - wx) * image.channel(x0, y0, c) + wx * image.channel(x1, y0, c);
                const double bot = (1.0 - wx) * image.channel(x0, y1, c) + wx * image.channel(x1, y1, c);
                const double v = ((1.0 - wy) * top + wy * bot) / 255.0;
                out[(std::size_t(oy) * P + ox) * 3 + c] = static_cast<float>(v);
            }
        }
    }
    return out;
}

}  // namespace docforge
