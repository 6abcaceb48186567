#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vqfuse {

// Axis-aligned box in pixel coordinates, (x1, y1) top-left and (x2, y2) bottom-right.
struct BoundingBox {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 1.0;
    double y2 = 1.0;

    bool operator==(const BoundingBox&) const = default;

    double width() const noexcept { return x2 - x1; }
    double height() const noexcept { return y2 - y1; }
    double area() const noexcept { return width() * height(); }

    // Empty string when valid, otherwise the violated constraint.
    std::string violation() const {
        if (!(std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2)))
            return "non-finite coordinate";
        if (x1 < 0.0 || y1 < 0.0) return "negative coordinate";
        if (!(x1 < x2)) return "x1 >= x2";
        if (!(y1 < y2)) return "y1 >= y2";
        return {};
    }
    bool valid() const { return violation().empty(); }
};

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept {
    const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

inline double union_area(const BoundingBox& a, const BoundingBox& b) noexcept {
    return a.area() + b.area() - intersection_area(a, b);
}

inline double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
    const double u = union_area(a, b);
    return u > 0.0 ? intersection_area(a, b) / u : 0.0;
}

}  // namespace vqfuse
