#include <doctest.h>

#include <nlohmann/json.hpp>

#include "scene/annotator.hpp"
#include "scene/error.hpp"
#include "scene/font5x7.hpp"
#include "scene/padding.hpp"

using namespace scene;

namespace {

SyntheticScene square_scene(int x, int y, int size) {
    SyntheticSceneSpec spec;
    spec.width = spec.height = 64;
    spec.background.primary = {30, 60, 200};
    spec.background_category = 0;
    Placement p;
    p.x = x;
    p.y = y;
    p.width = p.height = size;
    p.fill.primary = {220, 200, 40};
    p.category = 1;
    spec.placements.push_back(p);
    return generate_scene(spec);
}

// Two categories trained to separate topics; the classifier always picks pad-O.
struct TinyModel {
    PlsaModel plsa;
    std::vector<int> topics;
    PaddingClassifier classifier;
    AnnotationModel view() const { return {plsa, topics, classifier}; }
};

TinyModel tiny_model() {
    std::vector<FeatureVector> features;
    std::vector<int> cats;
    for (int i = 0; i < 6; ++i) {
        const auto s = square_scene(4 + 5 * i, 6 + 3 * i, 20 + i);
        auto img = std::make_shared<const RasterImage>(s.image);
        for (const auto& r : extract_regions(s.mask, img)) {
            features.push_back(cedd(pad(r, PaddingStrategy::PadOriginal)));
            cats.push_back(s.categories[r.id]);
        }
    }
    TinyModel m;
    TrainOptions opt;
    opt.topics = 2;
    opt.seed = 1;
    m.plsa = train(build_term_matrix(features), opt);
    m.topics = map_topics_by_vote(m.plsa, cats, 2);
    const StrategyMap map = build_strategy_map({{0, 6, 1, {1, 0, 0, 0}}, {1, 6, 1, {1, 0, 0, 0}}});
    m.classifier = train_padding_classifier(features, cats, map, {});
    return m;
}

// Independent rounding of 0.6 * base + 0.4 * tint.
std::uint8_t blend_oracle(std::uint8_t b, std::uint8_t t) { return static_cast<std::uint8_t>((6 * b + 4 * t + 5) / 10); }

}  // namespace

TEST_CASE("two-region scene is tagged correctly") {
    const TinyModel m = tiny_model();
    const auto s = square_scene(20, 18, 24);
    AnnotatorConfig cfg;
    const std::vector<std::string> names = {"water", "sun"};
    const SceneAnnotation a = annotate(s.image, m.view(), cfg, default_palette(2), names);
    REQUIRE(a.regions.size() == 2);
    const auto& ground = a.regions[a.mask.label(2, 2)];
    const auto& sun = a.regions[a.mask.label(31, 31)];
    REQUIRE(ground.tag);
    REQUIRE(sun.tag);
    CHECK(*ground.tag == 0);
    CHECK(*sun.tag == 1);
    for (const auto& r : a.regions) {
        CHECK(r.strategy_used == PaddingStrategy::PadOriginal);
        CHECK(r.ranking.size() == 2);
        CHECK(r.ranking[0].probability >= r.ranking[1].probability);
    }
    const auto j = to_json(a, names);
    CHECK(j.at("regions").size() == 2);
    CHECK(j.at("regions")[0].at("tag").at("name").is_string());
    CHECK(j.at("width") == 64);
}

TEST_CASE("threshold extremes") {
    const TinyModel m = tiny_model();
    const auto s = square_scene(10, 12, 30);
    AnnotatorConfig cfg;
    cfg.tau = 1.0 + 1e-9;
    auto image = std::make_shared<const RasterImage>(s.image);
    auto none = annotate_regions(image, s.mask, m.view(), cfg);
    for (const auto& r : none) {
        CHECK_FALSE(r.tag);
        CHECK_FALSE(r.ranking.empty());
    }
    apply_threshold(none, 0.0);
    for (const auto& r : none) {
        REQUIRE(r.tag);
        CHECK(*r.tag == r.ranking.front().category);
    }
}

TEST_CASE("small regions are filtered and never tagged") {
    const TinyModel m = tiny_model();
    const auto s = square_scene(10, 12, 4);  // 16 px < 1% of 4096
    AnnotatorConfig cfg;
    cfg.tau = 0.0;
    const auto regions = annotate_regions(std::make_shared<const RasterImage>(s.image), s.mask, m.view(), cfg);
    REQUIRE(regions.size() == 2);
    CHECK(regions[1].filtered);
    CHECK_FALSE(regions[1].tag);
    CHECK(regions[1].ranking.empty());
    CHECK_FALSE(regions[0].filtered);
}

TEST_CASE("images smaller than a block are rejected") {
    const TinyModel m = tiny_model();
    CHECK_THROWS_AS(annotate(RasterImage(5, 30), m.view(), AnnotatorConfig{}), DegenerateRegionError);
}

TEST_CASE("overlay rendering") {
    const auto s = square_scene(16, 16, 24);
    const std::vector<Rgb> palette = {{255, 0, 0}, {0, 255, 0}};
    std::vector<RegionAnnotation> regions(2);
    regions[0].region_id = 0;
    regions[1].region_id = 1;

    auto boundary = [&](int x, int y) {
        const auto l = s.mask.label(x, y);
        return (x > 0 && s.mask.label(x - 1, y) != l) || (x + 1 < 64 && s.mask.label(x + 1, y) != l) ||
               (y > 0 && s.mask.label(x, y - 1) != l) || (y + 1 < 64 && s.mask.label(x, y + 1) != l);
    };

    SUBCASE("no tags: original plus outlines") {
        const RasterImage out = render_overlay(s.image, s.mask, regions, palette);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) CHECK(out.at(x, y) == (boundary(x, y) ? kOutlineColour : s.image.at(x, y)));
    }
    SUBCASE("same tag merges into one blob") {
        regions[0].tag = 1;
        regions[1].tag = 1;
        CHECK(visual_groups(s.mask, regions) == std::vector<std::uint32_t>{0, 0});
        const RasterImage out = render_overlay(s.image, s.mask, regions, palette);
        // Boundary pixels between the two regions are tinted, not outlined.
        for (auto [x, y] : {std::pair{16, 16}, std::pair{39, 39}, std::pair{16, 39}, std::pair{15, 20}}) {
            REQUIRE(boundary(x, y));
            const Rgb b = s.image.at(x, y);
            CHECK(out.at(x, y) == Rgb{blend_oracle(b.r, 0), blend_oracle(b.g, 255), blend_oracle(b.b, 0)});
        }
        // Both regions get the same tint away from the text.
        const Rgb bg = s.image.at(1, 1), fg = s.image.at(20, 20);
        CHECK(out.at(1, 1) == Rgb{blend_oracle(bg.r, 0), blend_oracle(bg.g, 255), blend_oracle(bg.b, 0)});
        CHECK(out.at(20, 20) == Rgb{blend_oracle(fg.r, 0), blend_oracle(fg.g, 255), blend_oracle(fg.b, 0)});
    }
    SUBCASE("per-pixel blend") {
        regions[0].tag = 0;
        const RasterImage out = render_overlay(s.image, s.mask, regions, palette, std::vector<std::string>{""});
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                if (boundary(x, y)) continue;
                const Rgb b = s.image.at(x, y);
                const Rgb want = s.mask.label(x, y) == 0 ? Rgb{blend_oracle(b.r, 255), blend_oracle(b.g, 0), blend_oracle(b.b, 0)} : b;
                CHECK(out.at(x, y) == want);
            }
    }
    SUBCASE("missing palette entry") {
        regions[0].tag = 5;
        CHECK_THROWS_AS(render_overlay(s.image, s.mask, regions, palette), ContractError);
    }
}

TEST_CASE("blend and text") {
    for (int b = 0; b < 256; b += 5)
        for (int t = 0; t < 256; t += 7) {
            const auto v = blend({static_cast<std::uint8_t>(b), 0, 0}, {static_cast<std::uint8_t>(t), 0, 0}, kOverlayAlpha);
            CHECK(v.r == blend_oracle(static_cast<std::uint8_t>(b), static_cast<std::uint8_t>(t)));
        }
    RasterImage img(12, 7);
    draw_text(img, 0, 0, "A1", {255, 255, 255});
    const Glyph& a = glyph_for('A');
    const Glyph& one = glyph_for('1');
    for (int row = 0; row < 7; ++row)
        for (int col = 0; col < 5; ++col) {
            CHECK((img.at(col, row).r == 255) == (((a[static_cast<std::size_t>(row)] >> (4 - col)) & 1) == 1));
            CHECK((img.at(6 + col, row).r == 255) == (((one[static_cast<std::size_t>(row)] >> (4 - col)) & 1) == 1));
        }
    CHECK(glyph_for('a') == glyph_for('A'));
    CHECK(glyph_for('~') == glyph_for('?'));
    // Clipped drawing must not fail.
    draw_text(img, -3, 4, "XYZ", {1, 2, 3});
}

TEST_CASE("default palette is distinct and deterministic") {
    const auto p = default_palette(8);
    CHECK(p == default_palette(8));
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j) CHECK_FALSE(p[i] == p[j]);
}
