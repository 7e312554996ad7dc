#pragma once

#include <cstdint>
#include <string_view>

#include "scene/raster.hpp"

namespace scene {

/// How pixels inside a region's bounding box but outside the region are filled.
enum class PaddingStrategy : int {
    PadZero = 0,      // black
    PadOriginal = 1,  // source image content
};

std::string_view to_string(PaddingStrategy s) noexcept;
/// Accepts "pad-z"/"Z"/"zero" and "pad-o"/"O"/"original" (case-insensitive).
PaddingStrategy parse_padding_strategy(std::string_view text);

struct PaddedPatch {
    RasterImage pixels;
    PaddingStrategy strategy = PaddingStrategy::PadOriginal;
    std::uint32_t region_id = 0;

    int width() const noexcept { return pixels.width(); }
    int height() const noexcept { return pixels.height(); }
};

/// Rectangular realisation of a region over its bounding box.
PaddedPatch pad(const Region& region, PaddingStrategy strategy);

}  // namespace scene
