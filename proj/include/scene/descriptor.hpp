#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

#include "scene/color.hpp"
#include "scene/raster.hpp"

namespace scene {

struct PaddedPatch;

inline constexpr int kTextureRows = 6;
inline constexpr int kColorBins = 24;
inline constexpr int kFeatureLength = kTextureRows * kColorBins;  // 144

enum class TextureCategory : int {
    NonEdge = 0,
    NonDirectional = 1,
    Vertical = 2,
    Horizontal = 3,
    Diag45 = 4,
    Diag135 = 5,
};

std::string_view to_string(TextureCategory t) noexcept;

// 24-bin palette: three achromatic bins, then seven hue families with
// dark / plain / light shades.
enum class Hue : int { Red = 0, Orange, Yellow, Green, Cyan, Blue, Magenta };
enum class Shade : int { Dark = 0, Plain = 1, Light = 2 };

inline constexpr int kBlackBin = 0;
inline constexpr int kGrayBin = 1;
inline constexpr int kWhiteBin = 2;

constexpr int color_bin(Hue hue, Shade shade) noexcept {
    return 3 + 3 * static_cast<int>(hue) + static_cast<int>(shade);
}

inline constexpr std::array<double, 7> kHueCenters = {0.0, 30.0, 60.0, 120.0, 180.0, 240.0, 300.0};

struct FuzzyColorRules {
    double achromatic_saturation = 0.1;  // S below this is gray/white
    double black_value = 0.15;           // V below this is black
    double white_value = 0.9;            // achromatic and V above this is white
    double light_value = 0.65;
    double dark_value = 0.35;
};

using ColorMembership = std::array<double, kColorBins>;

/// Membership of one HSV colour over the 24 palette bins; weights sum to 1.
/// Throws ContractError for H outside [0, 360) or S, V outside [0, 1].
ColorMembership fuzzy_color_bin(const Hsv& hsv, const FuzzyColorRules& rules = {});

/// Mean luminances of a 2x2 sub-block grid, row-major: {top-left, top-right, bottom-left, bottom-right}.
using LumaBlock = std::array<double, 4>;

struct EdgeResponses {
    double vertical = 0.0;
    double horizontal = 0.0;
    double diag45 = 0.0;
    double diag135 = 0.0;
    double non_directional = 0.0;
};

/// Absolute responses of the five 2x2 edge masks.
EdgeResponses edge_responses(const LumaBlock& block) noexcept;

TextureCategory classify_texture(const LumaBlock& block, double edge_threshold = 0.05) noexcept;

struct DescriptorConfig {
    int block_size = 8;  // even, >= 2
    double edge_threshold = 0.05;
    FuzzyColorRules color_rules;
};

/// 144 non-negative weights, texture-major: index = 24 * texture + colour.
struct FeatureVector {
    std::array<double, kFeatureLength> values{};

    double operator[](std::size_t i) const noexcept { return values[i]; }
    double& operator[](std::size_t i) noexcept { return values[i]; }
    std::span<const double> span() const noexcept { return values; }

    double total() const noexcept;
    double texture_mass(TextureCategory t) const noexcept;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

constexpr std::size_t feature_index(TextureCategory t, int colour) noexcept {
    return static_cast<std::size_t>(static_cast<int>(t) * kColorBins + colour);
}

/// Colour/edge-directivity histogram of an image, L1-normalized. Blocks are
/// `block_size` squares; trailing partial blocks are dropped. Throws
/// DegenerateRegionError when no full block fits.
FeatureVector cedd(const RasterImage& pixels, const DescriptorConfig& cfg = {});
FeatureVector cedd(const PaddedPatch& patch, const DescriptorConfig& cfg = {});

}  // namespace scene
