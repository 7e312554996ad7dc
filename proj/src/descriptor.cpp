#include "scene/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <string>

#include "scene/error.hpp"
#include "scene/padding.hpp"

namespace scene {

std::string_view to_string(TextureCategory t) noexcept {
    switch (t) {
        case TextureCategory::NonEdge: return "non-edge";
        case TextureCategory::NonDirectional: return "non-directional";
        case TextureCategory::Vertical: return "vertical";
        case TextureCategory::Horizontal: return "horizontal";
        case TextureCategory::Diag45: return "diag45";
        case TextureCategory::Diag135: return "diag135";
    }
    return "?";
}

ColorMembership fuzzy_color_bin(const Hsv& hsv, const FuzzyColorRules& rules) {
    if (!(hsv.h >= 0.0 && hsv.h < 360.0) || !(hsv.s >= 0.0 && hsv.s <= 1.0) ||
        !(hsv.v >= 0.0 && hsv.v <= 1.0))
        throw ContractError("fuzzy_color_bin: HSV out of range");

    ColorMembership m{};
    if (hsv.v < rules.black_value) {
        m[kBlackBin] = 1.0;
        return m;
    }
    if (hsv.s < rules.achromatic_saturation) {
        m[hsv.v > rules.white_value ? kWhiteBin : kGrayBin] = 1.0;
        return m;
    }

    const Shade shade = hsv.v > rules.light_value ? Shade::Light
                        : hsv.v < rules.dark_value ? Shade::Dark
                                                   : Shade::Plain;

    // Triangular memberships between neighbouring hue centres (cyclic).
    const std::size_t n = kHueCenters.size();
    std::size_t lo = n - 1;
    for (std::size_t i = 0; i < n; ++i)
        if (kHueCenters[i] <= hsv.h) lo = i;
    const std::size_t hi = (lo + 1) % n;
    const double c_lo = kHueCenters[lo];
    const double c_hi = hi == 0 ? 360.0 : kHueCenters[hi];
    const double t = (hsv.h - c_lo) / (c_hi - c_lo);

    m[static_cast<std::size_t>(color_bin(static_cast<Hue>(lo), shade))] += 1.0 - t;
    m[static_cast<std::size_t>(color_bin(static_cast<Hue>(hi), shade))] += t;
    return m;
}

EdgeResponses edge_responses(const LumaBlock& q) noexcept {
    // Written as differences of pair sums so that a row flip negates each
    // response exactly (no reassociation in floating point).
    const double a = q[0], b = q[1], c = q[2], d = q[3];
    constexpr double r2 = std::numbers::sqrt2;
    EdgeResponses e;
    e.vertical = std::abs((a + c) - (b + d));
    e.horizontal = std::abs((a + b) - (c + d));
    e.diag45 = std::abs(r2 * (a - d));
    e.diag135 = std::abs(r2 * (b - c));
    e.non_directional = std::abs(2.0 * ((a + d) - (b + c)));
    return e;
}

TextureCategory classify_texture(const LumaBlock& block, double edge_threshold) noexcept {
    const EdgeResponses e = edge_responses(block);
    const std::array<std::pair<double, TextureCategory>, 5> ranked = {{
        {e.vertical, TextureCategory::Vertical},
        {e.horizontal, TextureCategory::Horizontal},
        {e.diag45, TextureCategory::Diag45},
        {e.diag135, TextureCategory::Diag135},
        {e.non_directional, TextureCategory::NonDirectional},
    }};
    auto best = ranked[0];
    for (const auto& r : ranked)
        if (r.first > best.first) best = r;
    return best.first < edge_threshold ? TextureCategory::NonEdge : best.second;
}

double FeatureVector::total() const noexcept {
    return std::accumulate(values.begin(), values.end(), 0.0);
}

double FeatureVector::texture_mass(TextureCategory t) const noexcept {
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(feature_index(t, 0));
    return std::accumulate(first, first + kColorBins, 0.0);
}

FeatureVector cedd(const RasterImage& img, const DescriptorConfig& cfg) {
    if (cfg.block_size < 2 || cfg.block_size % 2 != 0)
        throw ContractError("cedd: block_size must be even and >= 2");
    if (img.empty() || img.width() < 2 || img.height() < 2)
        throw DegenerateRegionError("cedd: patch smaller than 2x2");
    const int bs = cfg.block_size;
    const int half = bs / 2;
    const int nbx = img.width() / bs;
    const int nby = img.height() / bs;
    if (nbx == 0 || nby == 0)
        throw DegenerateRegionError("cedd: patch " + std::to_string(img.width()) + "x" +
                                    std::to_string(img.height()) + " smaller than one block");

    // Pixel counts per (texture row, packed colour). Memberships are applied once
    // per distinct colour in sorted order, so the result does not depend on the
    // order in which blocks are visited.
    std::array<std::map<std::uint32_t, std::uint64_t>, kTextureRows> counts;
    const double sub_norm = static_cast<double>(half * half) * 255000.0;

    for (int by = 0; by < nby; ++by) {
        for (int bx = 0; bx < nbx; ++bx) {
            const int x0 = bx * bs;
            const int y0 = by * bs;
            std::array<std::uint64_t, 4> sums{};
            for (int y = 0; y < bs; ++y)
                for (int x = 0; x < bs; ++x)
                    sums[static_cast<std::size_t>((y / half) * 2 + x / half)] += luma_milli(img.at(x0 + x, y0 + y));
            const LumaBlock luma = {sums[0] / sub_norm, sums[1] / sub_norm, sums[2] / sub_norm,
                                    sums[3] / sub_norm};
            const auto row = static_cast<std::size_t>(classify_texture(luma, cfg.edge_threshold));
            for (int y = 0; y < bs; ++y) {
                for (int x = 0; x < bs; ++x) {
                    const Rgb c = img.at(x0 + x, y0 + y);
                    ++counts[row][(static_cast<std::uint32_t>(c.r) << 16) | (static_cast<std::uint32_t>(c.g) << 8) | c.b];
                }
            }
        }
    }

    FeatureVector f;
    for (std::size_t t = 0; t < counts.size(); ++t) {
        for (const auto& [packed, n] : counts[t]) {
            const Rgb c{static_cast<std::uint8_t>(packed >> 16), static_cast<std::uint8_t>((packed >> 8) & 0xff),
                        static_cast<std::uint8_t>(packed & 0xff)};
            const ColorMembership m = fuzzy_color_bin(to_hsv(c), cfg.color_rules);
            for (std::size_t k = 0; k < m.size(); ++k)
                if (m[k] != 0.0) f.values[t * kColorBins + k] += static_cast<double>(n) * m[k];
        }
    }
    const double pixels = static_cast<double>(nbx) * nby * bs * bs;
    for (auto& v : f.values) v /= pixels;
    return f;
}

FeatureVector cedd(const PaddedPatch& patch, const DescriptorConfig& cfg) {
    try {
        return cedd(patch.pixels, cfg);
    } catch (const DegenerateRegionError& e) {
        throw DegenerateRegionError("region " + std::to_string(patch.region_id) + ": " + e.what(),
                                    static_cast<long>(patch.region_id));
    }
}

}  // namespace scene
