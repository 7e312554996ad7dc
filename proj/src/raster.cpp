#include "scene/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "scene/error.hpp"

namespace scene {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint8_t clamp_channel(int v) noexcept {
    return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

Rgb fill_color(const Fill& fill, int lx, int ly, int ax, int ay, std::uint64_t seed,
               std::uint64_t layer) noexcept {
    switch (fill.kind) {
        case FillKind::Solid:
            return fill.primary;
        case FillKind::Stripes: {
            const int period = std::max(fill.period, 1);
            const int coord = fill.orientation == StripeOrientation::Vertical ? lx : ly;
            return (coord / period) % 2 == 0 ? fill.primary : fill.secondary;
        }
        case FillKind::Noise: {
            // Keyed on absolute position so the texture does not depend on paint order.
            const std::uint64_t key = seed ^ (layer * 0x100000001b3ULL) ^
                                      (static_cast<std::uint64_t>(ay) << 32) ^
                                      static_cast<std::uint64_t>(ax);
            const std::uint64_t h = splitmix64(key);
            const int span = 2 * fill.noise_amplitude + 1;
            const int offset = static_cast<int>(h % static_cast<std::uint64_t>(span)) -
                               fill.noise_amplitude;
            return {clamp_channel(fill.primary.r + offset), clamp_channel(fill.primary.g + offset),
                    clamp_channel(fill.primary.b + offset)};
        }
    }
    return fill.primary;
}

}  // namespace

RasterImage::RasterImage(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width < 1 || height < 1) throw ContractError("RasterImage: dimensions must be >= 1");
    pixels_.resize(pixel_count() * 3);
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
        pixels_[i] = fill.r;
        pixels_[i + 1] = fill.g;
        pixels_[i + 2] = fill.b;
    }
}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 1 || height < 1) throw ContractError("RasterImage: dimensions must be >= 1");
    if (pixels_.size() != pixel_count() * 3)
        throw ContractError("RasterImage: buffer length must equal width*height*3");
}

RegionMask::RegionMask(int width, int height, std::vector<std::uint32_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
    if (width < 1 || height < 1) throw ContractError("RegionMask: dimensions must be >= 1");
    if (labels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw ContractError("RegionMask: label count must equal width*height");
    const std::uint32_t max_label = *std::max_element(labels_.begin(), labels_.end());
    std::vector<bool> seen(static_cast<std::size_t>(max_label) + 1, false);
    for (auto l : labels_) seen[l] = true;
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw ContractError("RegionMask: labels must form a contiguous range 0..R-1");
    region_count_ = max_label + 1;
}

RegionMask RegionMask::from_arbitrary_labels(int width, int height,
                                             const std::vector<std::uint32_t>& raw) {
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    std::vector<std::uint32_t> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto [it, inserted] = remap.try_emplace(raw[i], static_cast<std::uint32_t>(remap.size()));
        out[i] = it->second;
    }
    return RegionMask(width, height, std::move(out));
}

std::vector<Region> extract_regions(const RegionMask& mask,
                                    std::shared_ptr<const RasterImage> image) {
    if (!image) throw ContractError("extract_regions: image is null");
    if (mask.width() != image->width() || mask.height() != image->height())
        throw ContractError("extract_regions: mask and image dimensions differ");

    const std::uint32_t n = mask.region_count();
    std::vector<Region> regions(n);
    for (std::uint32_t id = 0; id < n; ++id) {
        regions[id].id = id;
        regions[id].bbox = {std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), -1, -1};
        regions[id].source = image;
    }
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            BBox& b = regions[mask.label(x, y)].bbox;
            b.x_min = std::min(b.x_min, x);
            b.y_min = std::min(b.y_min, y);
            b.x_max = std::max(b.x_max, x);
            b.y_max = std::max(b.y_max, y);
        }
    }
    for (auto& r : regions)
        r.mask.assign(static_cast<std::size_t>(r.bbox.width()) * static_cast<std::size_t>(r.bbox.height()), 0);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            Region& r = regions[mask.label(x, y)];
            r.mask[static_cast<std::size_t>(y - r.bbox.y_min) * static_cast<std::size_t>(r.bbox.width()) +
                   static_cast<std::size_t>(x - r.bbox.x_min)] = 1;
            ++r.area;
        }
    }
    return regions;
}

std::vector<Region> filter_regions(const std::vector<Region>& regions, double min_area_fraction) {
    if (!(min_area_fraction >= 0.0 && min_area_fraction <= 1.0))
        throw ContractError("filter_regions: min_area_fraction must lie in [0, 1]");
    std::vector<Region> kept;
    for (const auto& r : regions) {
        const double image_area = r.source ? static_cast<double>(r.source->pixel_count()) : 0.0;
        if (static_cast<double>(r.area) >= min_area_fraction * image_area) kept.push_back(r);
    }
    return kept;
}

bool shape_contains(Shape shape, int width, int height, int px, int py) noexcept {
    if (px < 0 || py < 0 || px >= width || py >= height) return false;
    // Pixel centres in a unit-normalized box.
    const double u = (px + 0.5) / width;
    const double v = (py + 0.5) / height;
    switch (shape) {
        case Shape::Rectangle:
            return true;
        case Shape::Ellipse: {
            const double du = u - 0.5;
            const double dv = v - 0.5;
            return du * du + dv * dv <= 0.25;
        }
        case Shape::Triangle:  // apex at top centre, base along the bottom edge
            return std::abs(u - 0.5) <= 0.5 * v;
        case Shape::Diamond:
            return std::abs(u - 0.5) + std::abs(v - 0.5) <= 0.5;
        case Shape::Cross:
            return std::abs(u - 0.5) <= 1.0 / 6.0 || std::abs(v - 0.5) <= 1.0 / 6.0;
        case Shape::Saltire:
            return std::abs(u - v) <= 0.14 || std::abs(u + v - 1.0) <= 0.14;
    }
    return false;
}

SyntheticScene generate_scene(const SyntheticSceneSpec& spec) {
    if (spec.width < 1 || spec.height < 1) throw DataError("scene spec: canvas must be at least 1x1");
    for (std::size_t i = 0; i < spec.placements.size(); ++i) {
        const auto& p = spec.placements[i];
        if (p.width < 1 || p.height < 1 || p.x < 0 || p.y < 0 || p.x + p.width > spec.width ||
            p.y + p.height > spec.height)
            throw DataError("scene spec: placement " + std::to_string(i) + " lies outside the canvas");
    }

    RasterImage image(spec.width, spec.height);
    // Layer 0 is the background, layer i+1 the i-th placement.
    std::vector<std::uint32_t> layer(image.pixel_count(), 0);
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x)
            image.set(x, y, fill_color(spec.background, x, y, x, y, spec.seed, 0));

    for (std::size_t i = 0; i < spec.placements.size(); ++i) {
        const auto& p = spec.placements[i];
        for (int ly = 0; ly < p.height; ++ly) {
            for (int lx = 0; lx < p.width; ++lx) {
                if (!shape_contains(p.shape, p.width, p.height, lx, ly)) continue;
                const int ax = p.x + lx;
                const int ay = p.y + ly;
                image.set(ax, ay, fill_color(p.fill, lx, ly, ax, ay, spec.seed, i + 1));
                layer[static_cast<std::size_t>(ay) * static_cast<std::size_t>(spec.width) +
                      static_cast<std::size_t>(ax)] = static_cast<std::uint32_t>(i + 1);
            }
        }
    }

    // Compact layers to contiguous labels, preserving layer order.
    std::vector<std::uint32_t> used(spec.placements.size() + 1, 0);
    for (auto l : layer) used[l] = 1;
    std::vector<std::uint32_t> remap(used.size(), 0);
    std::vector<int> categories;
    std::uint32_t next = 0;
    for (std::size_t l = 0; l < used.size(); ++l) {
        if (!used[l]) continue;
        remap[l] = next++;
        categories.push_back(l == 0 ? spec.background_category : spec.placements[l - 1].category);
    }
    for (auto& l : layer) l = remap[l];

    return {std::move(image), RegionMask(spec.width, spec.height, std::move(layer)), std::move(categories)};
}

}  // namespace scene
