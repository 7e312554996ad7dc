#include <doctest.h>

#include <random>

#include "scene/error.hpp"
#include "scene/padding.hpp"

using namespace scene;

TEST_CASE("full-mask regions pad identically") {
    std::vector<std::uint8_t> px(6 * 5 * 3);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(i * 37);
    auto img = std::make_shared<const RasterImage>(6, 5, px);
    const auto regions = extract_regions(RegionMask(6, 5, std::vector<std::uint32_t>(30, 0)), img);
    const auto z = pad(regions[0], PaddingStrategy::PadZero);
    const auto o = pad(regions[0], PaddingStrategy::PadOriginal);
    CHECK(z.pixels.bytes() == o.pixels.bytes());
    CHECK(z.pixels == *img);
}

TEST_CASE("ring around an excluded centre") {
    auto img = std::make_shared<const RasterImage>(3, 3, Rgb{255, 255, 255});
    const RegionMask mask(3, 3, {0, 0, 0, 0, 1, 0, 0, 0, 0});
    const auto ring = extract_regions(mask, img)[0];
    const auto z = pad(ring, PaddingStrategy::PadZero);
    const auto o = pad(ring, PaddingStrategy::PadOriginal);
    int black = 0;
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x) {
            black += z.pixels.at(x, y) == Rgb{0, 0, 0};
            CHECK(o.pixels.at(x, y) == Rgb{255, 255, 255});
        }
    CHECK(black == 1);
    CHECK(z.pixels.at(1, 1) == Rgb{0, 0, 0});
    CHECK(z.strategy == PaddingStrategy::PadZero);
    CHECK(z.region_id == 0);
}

TEST_CASE("padding matches a naive painter on random masks") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const int w = 3 + static_cast<int>(rng() % 20), h = 3 + static_cast<int>(rng() % 20);
        std::vector<std::uint8_t> px(static_cast<std::size_t>(w * h * 3));
        for (auto& v : px) v = static_cast<std::uint8_t>(rng());
        auto img = std::make_shared<const RasterImage>(w, h, px);
        std::vector<std::uint32_t> raw(static_cast<std::size_t>(w * h));
        for (auto& v : raw) v = rng() % 3;
        const RegionMask mask = RegionMask::from_arbitrary_labels(w, h, raw);
        for (const auto& r : extract_regions(mask, img)) {
            for (auto s : {PaddingStrategy::PadZero, PaddingStrategy::PadOriginal}) {
                const auto p = pad(r, s);
                REQUIRE(p.width() == r.bbox.width());
                REQUIRE(p.height() == r.bbox.height());
                for (int y = 0; y < p.height(); ++y)
                    for (int x = 0; x < p.width(); ++x) {
                        const int ax = r.bbox.x_min + x, ay = r.bbox.y_min + y;
                        const bool member = mask.label(ax, ay) == r.id;
                        const Rgb want = member || s == PaddingStrategy::PadOriginal ? img->at(ax, ay) : Rgb{};
                        CHECK(p.pixels.at(x, y) == want);
                    }
            }
        }
    }
}

TEST_CASE("strategy names") {
    CHECK(parse_padding_strategy("pad-z") == PaddingStrategy::PadZero);
    CHECK(parse_padding_strategy("O") == PaddingStrategy::PadOriginal);
    CHECK(parse_padding_strategy("Original") == PaddingStrategy::PadOriginal);
    CHECK(parse_padding_strategy(to_string(PaddingStrategy::PadZero)) == PaddingStrategy::PadZero);
    CHECK_THROWS(parse_padding_strategy("mirror"));
}
