#pragma once

#include <array>
#include <cstdint>

namespace scene {

/// 5x7 bitmap glyph: seven rows, bit 4 is the leftmost column.
using Glyph = std::array<std::uint8_t, 7>;

/// Glyph for A-Z (case-insensitive), 0-9, space, '-', '_', '/', '.'; '?' otherwise.
const Glyph& glyph_for(char c) noexcept;

}  // namespace scene
