#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "scene/color.hpp"
#include "scene/raster.hpp"

namespace scene {

/// Per-pixel colour classes after quantization. Palette entries are Lab.
struct ColorClassMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> classes;
    std::vector<Lab> palette;

    std::uint32_t at(int x, int y) const noexcept {
        return classes[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
    std::size_t class_count() const noexcept { return palette.size(); }
};

struct QuantizerOptions {
    int levels_per_axis = 16;  // initial uniform Lab grid
    int lloyd_iterations = 10;
};

/// Lab palette from occupied grid cells, refined by Lloyd iterations, then merged
/// agglomeratively while the closest pair is within `tm` of the largest initial
/// pairwise distance.
ColorClassMap quantize_colors(const RasterImage& image, double tm, const QuantizerOptions& options = {});

/// Agglomerative merge of a weighted palette. Returns, for each input colour,
/// its output class, plus the merged palette. Exposed for testing.
struct PaletteMerge {
    std::vector<std::uint32_t> assignment;
    std::vector<Lab> palette;
};
PaletteMerge merge_palette(const std::vector<Lab>& colors, const std::vector<double>& weights, double tm);

struct Window {
    int center_x = 0;
    int center_y = 0;
    int side = 9;
};

/// J = (S_T - S_W) / S_W over class-labelled pixel positions inside the window
/// (clipped to the map). J = 0 for a single-class window; saturates at
/// kMaxJ when every class collapses to a point.
double compute_j(const ColorClassMap& map, const Window& window);
inline constexpr double kMaxJ = 1000.0;

struct SegmenterConfig {
    double tm = 0.55;
    std::vector<int> window_sizes = {9};
    std::optional<double> j_threshold;  // default: mean(J) + 0.2 * stddev(J)
    double j_threshold_stddevs = 0.2;
    int min_region_px = 64;
    QuantizerOptions quantizer;
};

/// Per-pixel J values using the largest configured window.
std::vector<double> j_map(const ColorClassMap& map, int window_side);

/// quantize -> J map -> seed regions below threshold -> grow by ascending J ->
/// merge regions below min_region_px into the most colour-similar neighbour.
/// Output regions are 4-connected.
RegionMask segment(const RasterImage& image, const SegmenterConfig& config = {});

}  // namespace scene
