#pragma once

#include <span>

namespace docforge {

/// Axis-aligned pixel box, x0 <= x1, y0 <= y1.
struct Box {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    bool contains(const Box& inner, double eps = 1e-9) const {
        return inner.x0 >= x0 - eps && inner.y0 >= y0 - eps && inner.x1 <= x1 + eps && inner.y1 <= y1 + eps;
    }
    bool operator==(const Box&) const = default;
};

/// Layout coordinates on the 0..1000 grid: (x0, y0, x1, y1, w, h),
/// w and h computed after rounding.
struct NormBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;
    int w = 0;
    int h = 0;
    bool operator==(const NormBox&) const = default;
};

/// Union (min/max) of character boxes. Empty input -> InvalidInput.
Box token_bbox(std::span<const Box> boxes);

/// Enlarge by the context ratio r on each side, clamped to the page.
/// Degenerate boxes (zero width or height) expand by at least r * 1px on the
/// degenerate axis; *degenerate is set when that rule fires.
Box crop_box(const Box& box, double context_ratio, double page_w, double page_h,
             bool* degenerate = nullptr);

/// Scale to the 0..1000 grid, round half-up, clamp.
NormBox normalize_box(const Box& box, double page_w, double page_h);

}  // namespace docforge
