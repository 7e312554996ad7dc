#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace scene {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major 8-bit RGB image.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, Rgb fill = {});
    RasterImage(int width, int height, std::vector<std::uint8_t> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    bool empty() const noexcept { return width_ == 0 || height_ == 0; }

    Rgb at(int x, int y) const noexcept {
        const std::size_t i = offset(x, y);
        return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
    }
    void set(int x, int y, Rgb c) noexcept {
        const std::size_t i = offset(x, y);
        pixels_[i] = c.r;
        pixels_[i + 1] = c.g;
        pixels_[i + 2] = c.b;
    }

    const std::vector<std::uint8_t>& bytes() const noexcept { return pixels_; }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

/// Per-pixel region labels; labels always form the contiguous range 0..R-1.
class RegionMask {
public:
    RegionMask() = default;
    RegionMask(int width, int height, std::vector<std::uint32_t> labels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::uint32_t region_count() const noexcept { return region_count_; }
    std::uint32_t label(int x, int y) const noexcept {
        return labels_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                       static_cast<std::size_t>(x)];
    }
    const std::vector<std::uint32_t>& labels() const noexcept { return labels_; }

    /// Relabels an arbitrary label field into first-appearance (raster scan) order.
    static RegionMask from_arbitrary_labels(int width, int height,
                                            const std::vector<std::uint32_t>& raw);

    friend bool operator==(const RegionMask&, const RegionMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::uint32_t region_count_ = 0;
    std::vector<std::uint32_t> labels_;
};

/// Inclusive pixel rectangle.
struct BBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    int width() const noexcept { return x_max - x_min + 1; }
    int height() const noexcept { return y_max - y_min + 1; }
    friend bool operator==(const BBox&, const BBox&) = default;
};

struct Region {
    std::uint32_t id = 0;
    BBox bbox;
    std::vector<std::uint8_t> mask;  // bbox-sized, row-major, 1 = member
    std::size_t area = 0;
    std::shared_ptr<const RasterImage> source;
    std::optional<int> category;

    /// Membership at absolute image coordinates.
    bool contains(int x, int y) const noexcept {
        if (x < bbox.x_min || x > bbox.x_max || y < bbox.y_min || y > bbox.y_max) return false;
        return mask[static_cast<std::size_t>(y - bbox.y_min) * static_cast<std::size_t>(bbox.width()) +
                    static_cast<std::size_t>(x - bbox.x_min)] != 0;
    }
};

/// One Region per label, in label order.
std::vector<Region> extract_regions(const RegionMask& mask,
                                    std::shared_ptr<const RasterImage> image);

/// Keeps regions whose area is at least `min_area_fraction` of the source image area.
std::vector<Region> filter_regions(const std::vector<Region>& regions, double min_area_fraction);

// ---------------------------------------------------------------------------
// Synthetic scenes

/// Saltire is a diagonal X covering about half of its box.
enum class Shape { Rectangle, Ellipse, Triangle, Diamond, Cross, Saltire };
enum class FillKind { Solid, Stripes, Noise };
enum class StripeOrientation { Vertical, Horizontal };

struct Fill {
    FillKind kind = FillKind::Solid;
    Rgb primary{};
    Rgb secondary{};  // second stripe tone
    int period = 2;   // stripe width in pixels
    StripeOrientation orientation = StripeOrientation::Vertical;
    int noise_amplitude = 0;  // +/- offset applied equally to all channels
};

struct Placement {
    Shape shape = Shape::Rectangle;
    int x = 0;
    int y = 0;
    int width = 1;
    int height = 1;
    Fill fill;
    int category = 0;
};

struct SyntheticSceneSpec {
    int width = 64;
    int height = 64;
    Fill background;
    int background_category = 0;
    std::vector<Placement> placements;
    std::uint64_t seed = 0;
};

struct SyntheticScene {
    RasterImage image;
    RegionMask mask;
    std::vector<int> categories;  // indexed by mask label
};

/// Paints placements in order (later ones occlude earlier ones). Background is
/// one region, every visible placement is one region; empty ones are dropped.
SyntheticScene generate_scene(const SyntheticSceneSpec& spec);

/// Shape membership test at pixel (px, py), relative to the placement box.
bool shape_contains(Shape shape, int width, int height, int px, int py) noexcept;

}  // namespace scene
