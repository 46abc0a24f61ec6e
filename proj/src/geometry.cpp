#include "docforge/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "docforge/error.hpp"

namespace docforge {

Box token_bbox(std::span<const Box> boxes) {
    if (boxes.empty()) {
        throw InvalidInput("token_bbox: empty box list");
    }
    Box out = boxes.front();
    for (const Box& b : boxes.subspan(1)) {
        out.x0 = std::min(out.x0, b.x0);
        out.y0 = std::min(out.y0, b.y0);
        out.x1 = std::max(out.x1, b.x1);
        out.y1 = std::max(out.y1, b.y1);
    }
    return out;
}

Box crop_box(const Box& box, double context_ratio, double page_w, double page_h, bool* degenerate) {
    if (context_ratio < 0.0) {
        throw InvalidInput("crop_box: context ratio must be >= 0");
    }
    double w = box.width();
    double h = box.height();
    bool degen = false;
    if (w <= 0.0) {
        w = 1.0;
        degen = true;
    }
    if (h <= 0.0) {
        h = 1.0;
        degen = true;
    }
    if (degenerate != nullptr) {
        *degenerate = degen;
    }
    Box out;
    out.x0 = std::clamp(box.x0 - context_ratio * w, 0.0, page_w);
    out.y0 = std::clamp(box.y0 - context_ratio * h, 0.0, page_h);
    out.x1 = std::clamp(box.x1 + context_ratio * w, 0.0, page_w);
    out.y1 = std::clamp(box.y1 + context_ratio * h, 0.0, page_h);
    return out;
}

NormBox normalize_box(const Box& box, double page_w, double page_h) {
    if (page_w <= 0.0 || page_h <= 0.0) {
        throw InvalidInput("normalize_box: page dimensions must be positive");
    }
    auto scale = [](double v, double dim) {
        const int r = static_cast<int>(std::floor(v * 1000.0 / dim + 0.5));
        return std::clamp(r, 0, 1000);
    };
    NormBox out;
    out.x0 = scale(box.x0, page_w);
    out.y0 = scale(box.y0, page_h);
    out.x1 = scale(box.x1, page_w);
    out.y1 = scale(box.y1, page_h);
    out.w = out.x1 - out.x0;
    out.h = out.y1 - out.y0;
    return out;
}

}  // namespace docforge
