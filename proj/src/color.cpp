#include "scene/color.hpp"

#include <algorithm>
#include <cmath>

namespace scene {

namespace {

double srgb_to_linear(std::uint8_t c) noexcept {
    const double v = c / 255.0;
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double lab_f(double t) noexcept {
    constexpr double delta = 6.0 / 29.0;
    return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

Lab to_lab(Rgb c) noexcept {
    const double r = srgb_to_linear(c.r);
    const double g = srgb_to_linear(c.g);
    const double b = srgb_to_linear(c.b);
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    // D65 white
    const double fx = lab_f(x / 0.95047);
    const double fy = lab_f(y / 1.0);
    const double fz = lab_f(z / 1.08883);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double lab_distance(const Lab& x, const Lab& y) noexcept {
    const double dl = x.l - y.l;
    const double da = x.a - y.a;
    const double db = x.b - y.b;
    return std::sqrt(dl * dl + da * da + db * db);
}

Hsv to_hsv(Rgb c) noexcept {
    const int mx = std::max({c.r, c.g, c.b});
    const int mn = std::min({c.r, c.g, c.b});
    const int delta = mx - mn;
    Hsv out;
    out.v = mx / 255.0;
    out.s = mx == 0 ? 0.0 : static_cast<double>(delta) / mx;
    if (delta == 0) return out;
    double h = 0.0;
    if (mx == c.r)
        h = 60.0 * static_cast<double>(c.g - c.b) / delta;
    else if (mx == c.g)
        h = 60.0 * (2.0 + static_cast<double>(c.b - c.r) / delta);
    else
        h = 60.0 * (4.0 + static_cast<double>(c.r - c.g) / delta);
    if (h < 0.0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
    out.h = h;
    return out;
}

}  // namespace scene
