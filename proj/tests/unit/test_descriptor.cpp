#include <doctest.h>

#include <cmath>
#include <random>

#include "scene/descriptor.hpp"
#include "scene/error.hpp"
#include "scene/padding.hpp"

using namespace scene;

TEST_CASE("fuzzy colour bins") {
    const auto white = fuzzy_color_bin({0, 0, 1});
    CHECK(white[kWhiteBin] == 1.0);
    const auto black = fuzzy_color_bin({0, 0, 0});
    CHECK(black[kBlackBin] == 1.0);
    const auto gray = fuzzy_color_bin({200, 0.05, 0.5});
    CHECK(gray[kGrayBin] == 1.0);

    // Hue centres sit at 0 (red) and 30 (orange): 30 is all orange, 15 splits evenly.
    const auto orange = fuzzy_color_bin({30, 1, 0.5});
    CHECK(orange[color_bin(Hue::Orange, Shade::Plain)] == doctest::Approx(1.0));
    const auto mid = fuzzy_color_bin({15, 1, 0.5});
    CHECK(mid[color_bin(Hue::Red, Shade::Plain)] == doctest::Approx(0.5));
    CHECK(mid[color_bin(Hue::Orange, Shade::Plain)] == doctest::Approx(0.5));
    // Between magenta (300) and red (360): 330 splits evenly.
    const auto wrap = fuzzy_color_bin({330, 1, 0.9});
    CHECK(wrap[color_bin(Hue::Magenta, Shade::Light)] == doctest::Approx(0.5));
    CHECK(wrap[color_bin(Hue::Red, Shade::Light)] == doctest::Approx(0.5));
    // Triangle value at an arbitrary hue: 90 lies 1/2 of the way from yellow (60) to green (120).
    const auto y2g = fuzzy_color_bin({75, 0.8, 0.2});
    CHECK(y2g[color_bin(Hue::Yellow, Shade::Dark)] == doctest::Approx(0.75));
    CHECK(y2g[color_bin(Hue::Green, Shade::Dark)] == doctest::Approx(0.25));

    CHECK_THROWS_AS(fuzzy_color_bin({360, 0.5, 0.5}), ContractError);
    CHECK_THROWS_AS(fuzzy_color_bin({10, 1.5, 0.5}), ContractError);
    CHECK_THROWS_AS(fuzzy_color_bin({10, 0.5, -0.1}), ContractError);
}

TEST_CASE("memberships sum to one over an HSV grid") {
    for (int h = 0; h < 360; h += 7)
        for (int s = 0; s <= 10; ++s)
            for (int v = 0; v <= 10; ++v) {
                const auto m = fuzzy_color_bin({static_cast<double>(h), s / 10.0, v / 10.0});
                double total = 0;
                for (double w : m) {
                    CHECK(w >= 0.0);
                    total += w;
                }
                CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            }
}

TEST_CASE("texture classification") {
    CHECK(classify_texture({0.4, 0.4, 0.4, 0.4}) == TextureCategory::NonEdge);
    const auto e = edge_responses({0.4, 0.4, 0.4, 0.4});
    CHECK(e.vertical == 0.0);
    CHECK(e.non_directional == 0.0);
    CHECK(classify_texture({1, 0, 1, 0}) == TextureCategory::Vertical);
    CHECK(classify_texture({1, 1, 0, 0}) == TextureCategory::Horizontal);
    CHECK(classify_texture({1, 0.5, 0.5, 0}) == TextureCategory::Diag45);
    CHECK(classify_texture({0.5, 1, 0, 0.5}) == TextureCategory::Diag135);
    // The non-directional mask responds 4 to [1 0; 0 1]; both diagonal masks give 0.
    const auto d = edge_responses({1, 0, 0, 1});
    CHECK(d.non_directional == doctest::Approx(4.0));
    CHECK(d.diag135 == 0.0);
    CHECK(d.diag45 == 0.0);
    CHECK(classify_texture({1, 0, 0, 1}) == TextureCategory::NonDirectional);
    // Below the edge threshold everything is NonEdge.
    CHECK(classify_texture({0.51, 0.5, 0.51, 0.5}) == TextureCategory::NonEdge);
}

TEST_CASE("uniform patch descriptor") {
    const FeatureVector f = cedd(RasterImage(80, 80, Rgb{255, 255, 255}));
    CHECK(f[feature_index(TextureCategory::NonEdge, kWhiteBin)] == doctest::Approx(1.0));
    CHECK(feature_index(TextureCategory::NonEdge, kWhiteBin) == 2);
    CHECK(f.values.size() == 144);
    CHECK(f.total() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stripe descriptors match a block-by-block count") {
    auto stripes = [](int side, int width) {
        RasterImage img(side, side);
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) img.set(x, y, (x / width) % 2 ? Rgb{255, 255, 255} : Rgb{0, 0, 0});
        return img;
    };
    // Every block holds equal black and white pixels and a dark-left /
    // light-right sub-block pattern, so all mass is Vertical, half per bin.
    DescriptorConfig fine;
    fine.block_size = 2;
    for (const auto& [img, cfg] : {std::pair{stripes(64, 1), fine}, std::pair{stripes(64, 4), DescriptorConfig{}}}) {
        const FeatureVector f = cedd(img, cfg);
        CHECK(f[feature_index(TextureCategory::Vertical, kBlackBin)] == doctest::Approx(0.5));
        CHECK(f[feature_index(TextureCategory::Vertical, kWhiteBin)] == doctest::Approx(0.5));
    }
    // One-pixel stripes vanish inside 4x4 sub-block means.
    CHECK(cedd(stripes(64, 1)).texture_mass(TextureCategory::NonEdge) == doctest::Approx(1.0));
}

TEST_CASE("partial blocks are dropped and tiny patches are degenerate") {
    RasterImage img(12, 9, Rgb{255, 255, 255});
    for (int y = 0; y < 9; ++y)
        for (int x = 8; x < 12; ++x) img.set(x, y, {0, 0, 0});
    const FeatureVector f = cedd(img);
    CHECK(f[feature_index(TextureCategory::NonEdge, kWhiteBin)] == doctest::Approx(1.0));
    CHECK_THROWS_AS(cedd(RasterImage(7, 20)), DegenerateRegionError);
    DescriptorConfig odd;
    odd.block_size = 3;
    CHECK_THROWS_AS(cedd(RasterImage(8, 8), odd), ContractError);
}

TEST_CASE("vertical flip swaps diagonal masses and keeps the rest") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const int w = 32, h = 24;
        RasterImage a(w, h), b(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const Rgb c{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                            static_cast<std::uint8_t>(rng())};
                a.set(x, y, c);
                b.set(x, h - 1 - y, c);
            }
        const FeatureVector fa = cedd(a), fb = cedd(b);
        CHECK(fa.texture_mass(TextureCategory::Diag45) == fb.texture_mass(TextureCategory::Diag135));
        CHECK(fa.texture_mass(TextureCategory::Diag135) == fb.texture_mass(TextureCategory::Diag45));
        for (auto t : {TextureCategory::NonEdge, TextureCategory::NonDirectional, TextureCategory::Vertical,
                       TextureCategory::Horizontal})
            CHECK(fa.texture_mass(t) == doctest::Approx(fb.texture_mass(t)).epsilon(1e-12));
    }
}

TEST_CASE("horizontal translation by one block on a periodic patch") {
    std::mt19937 rng(4);
    const int period = 16, block = 8, w = 48, h = 16;
    std::vector<Rgb> tile(static_cast<std::size_t>(period * h));
    for (auto& c : tile)
        c = {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng())};
    RasterImage a(w, h), b(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            a.set(x, y, tile[static_cast<std::size_t>(y * period + x % period)]);
            b.set(x, y, tile[static_cast<std::size_t>(y * period + (x + block) % period)]);
        }
    const FeatureVector fa = cedd(a), fb = cedd(b);
    for (std::size_t i = 0; i < 144; ++i) CHECK(fa[i] == doctest::Approx(fb[i]).epsilon(1e-12));
}

TEST_CASE("padded patches describe like their pixels") {
    auto img = std::make_shared<const RasterImage>(16, 16, Rgb{10, 200, 10});
    const auto r = extract_regions(RegionMask(16, 16, std::vector<std::uint32_t>(256, 0)), img)[0];
    CHECK(cedd(pad(r, PaddingStrategy::PadZero)) == cedd(*img));
}
