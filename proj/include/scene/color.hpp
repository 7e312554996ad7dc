#pragma once

#include <array>
#include <cstdint>

#include "scene/raster.hpp"

namespace scene {

struct Lab {
    double l = 0.0;
    double a = 0.0;
    double b = 0.0;
};

struct Hsv {
    double h = 0.0;  // degrees, [0, 360)
    double s = 0.0;  // [0, 1]
    double v = 0.0;  // [0, 1]
};

/// sRGB (D65) to CIE-Lab.
Lab to_lab(Rgb c) noexcept;
double lab_distance(const Lab& x, const Lab& y) noexcept;

Hsv to_hsv(Rgb c) noexcept;

/// 299R + 587G + 114B; exact integer so block sums are order-independent.
inline std::uint32_t luma_milli(Rgb c) noexcept {
    return 299u * c.r + 587u * c.g + 114u * c.b;
}

}  // namespace scene
