#include "scene/padding.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "scene/error.hpp"

namespace scene {

std::string_view to_string(PaddingStrategy s) noexcept {
    return s == PaddingStrategy::PadZero ? "pad-z" : "pad-o";
}

PaddingStrategy parse_padding_strategy(std::string_view text) {
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "pad-z" || t == "z" || t == "zero" || t == "padzero") return PaddingStrategy::PadZero;
    if (t == "pad-o" || t == "o" || t == "original" || t == "padoriginal") return PaddingStrategy::PadOriginal;
    throw DataError("unknown padding strategy '" + std::string(text) + "'");
}

PaddedPatch pad(const Region& region, PaddingStrategy strategy) {
    if (!region.source) throw ContractError("pad: region has no source image");
    const RasterImage& src = *region.source;
    const BBox& b = region.bbox;
    if (b.x_min < 0 || b.y_min < 0 || b.x_max >= src.width() || b.y_max >= src.height() || b.width() < 1 ||
        b.height() < 1)
        throw ContractError("pad: region bbox outside source image");
    if (region.mask.size() != static_cast<std::size_t>(b.width()) * static_cast<std::size_t>(b.height()))
        throw ContractError("pad: region mask does not match bbox");

    PaddedPatch out{RasterImage(b.width(), b.height()), strategy, region.id};
    std::size_t i = 0;
    for (int y = 0; y < b.height(); ++y) {
        for (int x = 0; x < b.width(); ++x, ++i) {
            if (region.mask[i] || strategy == PaddingStrategy::PadOriginal)
                out.pixels.set(x, y, src.at(b.x_min + x, b.y_min + y));
        }
    }
    return out;
}

}  // namespace scene
