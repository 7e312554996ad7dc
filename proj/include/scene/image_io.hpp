#pragma once

#include <filesystem>

#include "scene/raster.hpp"

namespace scene {

/// Reads any PNG as 8-bit RGB (alpha stripped, gray/palette expanded, 16-bit reduced).
RasterImage read_png_rgb(const std::filesystem::path& path);
void write_png_rgb(const std::filesystem::path& path, const RasterImage& image);

/// Ground-truth masks: single-channel 16-bit PNG, pixel value = region label.
RegionMask read_png_mask(const std::filesystem::path& path);
void write_png_mask(const std::filesystem::path& path, const RegionMask& mask);

/// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const void* data, std::size_t size);

}  // namespace scene
