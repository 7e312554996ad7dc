#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scene/adaptive.hpp"
#include "scene/descriptor.hpp"
#include "scene/plsa.hpp"
#include "scene/raster.hpp"
#include "scene/segmenter.hpp"

namespace scene {

struct AnnotatorConfig {
    SegmenterConfig segmenter;
    DescriptorConfig descriptor;
    FoldInOptions fold;
    double min_area_fraction = 0.01;
    double tau = 0.3;  // absolute posterior threshold for tagging
};

struct RankedTopic {
    int topic = 0;
    int category = -1;  // -1 when the topic maps to no category
    double probability = 0.0;
};

struct RegionAnnotation {
    std::uint32_t region_id = 0;
    BBox bbox;
    std::size_t area = 0;
    bool filtered = false;  // below the minimum area; never described or tagged
    PaddingStrategy strategy_used = PaddingStrategy::PadOriginal;
    std::vector<RankedTopic> ranking;  // descending probability
    std::optional<int> tag;            // category id
    std::string diagnostic;
};

struct SceneAnnotation {
    std::string image_ref;
    RegionMask mask;
    std::vector<RegionAnnotation> regions;  // indexed by mask label
    RasterImage overlay;
};

/// Trained pieces used at annotation time.
struct AnnotationModel {
    const PlsaModel& plsa;            // trained on pad-O features
    std::span<const int> topic_category;
    const PaddingClassifier& classifier;
};

/// Segment, then annotate every region. Throws DegenerateRegionError when the
/// image cannot hold a single descriptor block.
SceneAnnotation annotate(const RasterImage& image, const AnnotationModel& model, const AnnotatorConfig& cfg,
                         std::span<const Rgb> palette = {}, std::span<const std::string> names = {});

/// Annotation of a given partition (skips segmentation). The overlay is left empty.
std::vector<RegionAnnotation> annotate_regions(std::shared_ptr<const RasterImage> image, const RegionMask& mask,
                                               const AnnotationModel& model, const AnnotatorConfig& cfg);

/// Re-applies a threshold to existing rankings.
void apply_threshold(std::vector<RegionAnnotation>& regions, double tau);

/// Distinct, deterministic tint colours.
std::vector<Rgb> default_palette(std::size_t count);

/// round((1 - alpha) * base + alpha * tint) per channel.
Rgb blend(Rgb base, Rgb tint, double alpha) noexcept;
inline constexpr double kOverlayAlpha = 0.4;
inline constexpr Rgb kOutlineColour{255, 255, 255};
inline constexpr Rgb kTextColour{255, 255, 255};
inline constexpr Rgb kTextShadow{0, 0, 0};

/// Visual groups: 4-adjacent regions carrying the same tag share a group.
/// Returns a group id per region (the smallest member region id).
std::vector<std::uint32_t> visual_groups(const RegionMask& mask, const std::vector<RegionAnnotation>& regions);

/// Tint tagged regions, outline group boundaries, print tag names at region
/// centroids. Unknown names print as the category number.
RasterImage render_overlay(const RasterImage& image, const RegionMask& mask,
                           const std::vector<RegionAnnotation>& regions, std::span<const Rgb> palette,
                           std::span<const std::string> names = {});

/// Draws text with the 5x7 font, one pixel of spacing, clipped to the image.
void draw_text(RasterImage& image, int x, int y, std::string_view text, Rgb colour);

nlohmann::json to_json(const SceneAnnotation& annotation, std::span<const std::string> names = {});

}  // namespace scene
