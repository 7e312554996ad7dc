#include "scene/annotator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "scene/error.hpp"
#include "scene/font5x7.hpp"
#include "scene/padding.hpp"

namespace scene {

namespace {

std::uint32_t find_root(std::vector<std::uint32_t>& parent, std::uint32_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

void unite(std::vector<std::uint32_t>& parent, std::uint32_t a, std::uint32_t b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a == b) return;
    if (a < b) parent[b] = a;
    else parent[a] = b;
}

std::string label_text(int category, std::span<const std::string> names) {
    if (category >= 0 && static_cast<std::size_t>(category) < names.size()) return names[static_cast<std::size_t>(category)];
    return std::to_string(category);
}

}  // namespace

void apply_threshold(std::vector<RegionAnnotation>& regions, double tau) {
    for (auto& r : regions) {
        r.tag.reset();
        if (r.ranking.empty()) continue;
        const RankedTopic& top = r.ranking.front();
        if (top.probability >= tau && top.category >= 0) r.tag = top.category;
    }
}

std::vector<RegionAnnotation> annotate_regions(std::shared_ptr<const RasterImage> image, const RegionMask& mask,
                                               const AnnotationModel& model, const AnnotatorConfig& cfg) {
    if (!image) throw ContractError("annotate_regions: null image");
    if (model.topic_category.size() != model.plsa.topics)
        throw ContractError("annotate_regions: topic map size differs from topic count");
    const auto regions = extract_regions(mask, image);
    const double min_area = cfg.min_area_fraction * static_cast<double>(image->pixel_count());

    std::vector<RegionAnnotation> out(regions.size());
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const Region& region = regions[i];
        RegionAnnotation& a = out[i];
        a.region_id = region.id;
        a.bbox = region.bbox;
        a.area = region.area;
        if (static_cast<double>(region.area) < min_area) {
            a.filtered = true;
            a.diagnostic = "below minimum area";
            continue;
        }
        try {
            // The strategy is predicted from the pad-O feature, then the region
            // is described again under the chosen padding.
            const FeatureVector original = cedd(pad(region, PaddingStrategy::PadOriginal), cfg.descriptor);
            a.strategy_used = select_strategy(model.classifier, original);
            const FeatureVector feature = a.strategy_used == PaddingStrategy::PadOriginal
                                              ? original
                                              : cedd(pad(region, a.strategy_used), cfg.descriptor);
            const FoldInResult fr = fold_in(model.plsa, feature, cfg.fold);
            a.ranking.reserve(fr.ranking.size());
            for (int k : fr.ranking)
                a.ranking.push_back({k, model.topic_category[static_cast<std::size_t>(k)],
                                     fr.posterior[static_cast<std::size_t>(k)]});
            if (a.ranking.front().category < 0) a.diagnostic = "top topic maps to no category";
        } catch (const DegenerateRegionError& e) {
            a.ranking.clear();
            a.diagnostic = e.what();
        }
    }
    apply_threshold(out, cfg.tau);
    return out;
}

SceneAnnotation annotate(const RasterImage& image, const AnnotationModel& model, const AnnotatorConfig& cfg,
                         std::span<const Rgb> palette, std::span<const std::string> names) {
    const int block = cfg.descriptor.block_size;
    if (image.width() < block || image.height() < block)
        throw DegenerateRegionError("annotate: image " + std::to_string(image.width()) + "x" +
                                    std::to_string(image.height()) + " is smaller than one " +
                                    std::to_string(block) + "x" + std::to_string(block) + " descriptor block");
    auto shared = std::make_shared<const RasterImage>(image);
    SceneAnnotation out;
    out.mask = segment(image, cfg.segmenter);
    out.regions = annotate_regions(shared, out.mask, model, cfg);
    std::vector<Rgb> fallback;
    if (palette.empty()) {
        fallback = default_palette(std::max<std::size_t>(names.size(), 1));
        palette = fallback;
    }
    out.overlay = render_overlay(image, out.mask, out.regions, palette, names);
    return out;
}

std::vector<Rgb> default_palette(std::size_t count) {
    static constexpr Rgb base[] = {
        {230, 25, 75},  {60, 180, 75},  {255, 225, 25}, {0, 130, 200},  {245, 130, 48},  {145, 30, 180},
        {70, 240, 240}, {240, 50, 230}, {210, 245, 60}, {250, 190, 212}, {0, 128, 128}, {170, 110, 40},
    };
    std::vector<Rgb> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = base[i % std::size(base)];
    return out;
}

Rgb blend(Rgb base, Rgb tint, double alpha) noexcept {
    auto mix = [alpha](std::uint8_t b, std::uint8_t t) {
        const double v = (1.0 - alpha) * b + alpha * t;
        return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    };
    return {mix(base.r, tint.r), mix(base.g, tint.g), mix(base.b, tint.b)};
}

std::vector<std::uint32_t> visual_groups(const RegionMask& mask, const std::vector<RegionAnnotation>& regions) {
    if (regions.size() != mask.region_count())
        throw ContractError("visual_groups: annotation count differs from region count");
    std::vector<std::uint32_t> parent(regions.size());
    std::iota(parent.begin(), parent.end(), 0u);
    auto same_tag = [&](std::uint32_t a, std::uint32_t b) {
        return regions[a].tag && regions[b].tag && *regions[a].tag == *regions[b].tag;
    };
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            const std::uint32_t l = mask.label(x, y);
            if (x + 1 < mask.width()) {
                const std::uint32_t r = mask.label(x + 1, y);
                if (r != l && same_tag(l, r)) unite(parent, l, r);
            }
            if (y + 1 < mask.height()) {
                const std::uint32_t d = mask.label(x, y + 1);
                if (d != l && same_tag(l, d)) unite(parent, l, d);
            }
        }
    }
    std::vector<std::uint32_t> group(regions.size());
    for (std::uint32_t i = 0; i < group.size(); ++i) group[i] = find_root(parent, i);
    return group;
}

void draw_text(RasterImage& image, int x, int y, std::string_view text, Rgb colour) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        const Glyph& g = glyph_for(text[i]);
        const int gx = x + static_cast<int>(i) * 6;
        for (int row = 0; row < 7; ++row) {
            for (int col = 0; col < 5; ++col) {
                if (!((g[static_cast<std::size_t>(row)] >> (4 - col)) & 1)) continue;
                const int px = gx + col;
                const int py = y + row;
                if (px >= 0 && py >= 0 && px < image.width() && py < image.height()) image.set(px, py, colour);
            }
        }
    }
}

RasterImage render_overlay(const RasterImage& image, const RegionMask& mask,
                           const std::vector<RegionAnnotation>& regions, std::span<const Rgb> palette,
                           std::span<const std::string> names) {
    if (image.width() != mask.width() || image.height() != mask.height())
        throw ContractError("render_overlay: image and mask sizes differ");
    for (const auto& r : regions)
        if (r.tag && (*r.tag < 0 || static_cast<std::size_t>(*r.tag) >= palette.size()))
            throw ContractError("render_overlay: no palette colour for category " + std::to_string(*r.tag));
    const auto group = visual_groups(mask, regions);

    RasterImage out = image;
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            const auto& a = regions[mask.label(x, y)];
            if (a.tag) out.set(x, y, blend(image.at(x, y), palette[static_cast<std::size_t>(*a.tag)], kOverlayAlpha));
        }
    }
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            const std::uint32_t g = group[mask.label(x, y)];
            const bool edge = (x + 1 < image.width() && group[mask.label(x + 1, y)] != g) ||
                              (x > 0 && group[mask.label(x - 1, y)] != g) ||
                              (y + 1 < image.height() && group[mask.label(x, y + 1)] != g) ||
                              (y > 0 && group[mask.label(x, y - 1)] != g);
            if (edge) out.set(x, y, kOutlineColour);
        }
    }

    // Centroids from pixel sums, rounded to the nearest pixel.
    std::vector<double> sx(regions.size(), 0.0), sy(regions.size(), 0.0), n(regions.size(), 0.0);
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            const std::uint32_t l = mask.label(x, y);
            sx[l] += x;
            sy[l] += y;
            n[l] += 1.0;
        }
    }
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (!regions[i].tag || n[i] == 0.0) continue;
        const std::string text = label_text(*regions[i].tag, names);
        const int width = static_cast<int>(text.size()) * 6 - 1;
        const int cx = static_cast<int>(std::lround(sx[i] / n[i]));
        const int cy = static_cast<int>(std::lround(sy[i] / n[i]));
        const int x0 = cx - width / 2;
        const int y0 = cy - 3;
        draw_text(out, x0 + 1, y0 + 1, text, kTextShadow);
        draw_text(out, x0, y0, text, kTextColour);
    }
    return out;
}

nlohmann::json to_json(const SceneAnnotation& annotation, std::span<const std::string> names) {
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& r : annotation.regions) {
        nlohmann::json ranking = nlohmann::json::array();
        for (const auto& t : r.ranking)
            ranking.push_back({{"topic", t.topic}, {"category", t.category}, {"probability", t.probability}});
        nlohmann::json tag = nullptr;
        if (r.tag) tag = {{"category", *r.tag}, {"name", label_text(*r.tag, names)}};
        regions.push_back({{"id", r.region_id},
                           {"bbox", {r.bbox.x_min, r.bbox.y_min, r.bbox.x_max, r.bbox.y_max}},
                           {"area", r.area},
                           {"filtered", r.filtered},
                           {"strategy", std::string(to_string(r.strategy_used))},
                           {"ranking", std::move(ranking)},
                           {"tag", std::move(tag)},
                           {"diagnostic", r.diagnostic}});
    }
    return {{"image", annotation.image_ref},
            {"width", annotation.mask.width()},
            {"height", annotation.mask.height()},
            {"regions", std::move(regions)}};
}

}  // namespace scene
