#include "contrast_corpus.hpp"

#include <fstream>
#include <random>
#include <string>

#include "scene/image_io.hpp"

namespace fs = std::filesystem;

namespace scene::testing {

namespace {

constexpr int kSide = 96;
constexpr int kImagesPerSplit[3] = {10, 6, 8};
constexpr Rgb kColours[] = {{20, 30, 120}, {20, 90, 20}, {250, 230, 120}, {0, 160, 160}, {0, 160, 160}, {230, 40, 40}};
constexpr Rgb kEmblemGround{200, 50, 200};

Fill solid(Rgb c) {
    Fill f;
    f.primary = c;
    return f;
}

}  // namespace

DatasetManifest write_contrast_dataset(const fs::path& out_dir, std::uint64_t seed) {
    fs::create_directories(out_dir / "images");
    fs::create_directories(out_dir / "masks");
    DatasetManifest manifest;
    manifest.categories = {"navy", "green", "sand", "emblem", "tile", "cross"};
    manifest.scenes = {"grounds", "emblems"};

    std::mt19937_64 rng(seed);
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    auto place = [&](Shape shape, double lo, double hi, int category, Rgb colour) {
        Placement p;
        p.shape = shape;
        p.width = static_cast<int>(uniform(lo, hi) * kSide);
        p.height = static_cast<int>(uniform(lo, hi) * kSide);
        p.x = static_cast<int>(uniform(2, kSide - p.width - 2));
        p.y = static_cast<int>(uniform(2, kSide - p.height - 2));
        p.fill = solid(colour);
        p.category = category;
        return p;
    };

    int counter = 0;
    auto emit = [&](const SyntheticSceneSpec& spec, int split, const std::string& scene) {
        const SyntheticScene s = generate_scene(spec);
        const std::string stem = scene + "_" + kSplitNames[split] + "_" + std::to_string(counter++);
        ManifestEntry e;
        e.image = out_dir / "images" / (stem + ".png");
        e.mask = out_dir / "masks" / (stem + ".png");
        write_png_rgb(e.image, s.image);
        write_png_mask(e.mask, s.mask);
        e.region_categories = s.categories;
        e.split = kSplitNames[split];
        e.scene = scene;
        manifest.entries.push_back(std::move(e));
    };

    for (int split = 0; split < 3; ++split) {
        for (int i = 0; i < kImagesPerSplit[split]; ++i) {
            for (int ground : {kNavy, kGreen, kSand}) {
                for (int object : {kCross, kTile}) {
                    if (object == kTile && i % 2) continue;
                    SyntheticSceneSpec spec;
                    spec.width = spec.height = kSide;
                    spec.background = solid(kColours[ground]);
                    spec.background_category = ground;
                    spec.placements.push_back(object == kCross
                                                  ? place(Shape::Saltire, 0.35, 0.55, kCross, kColours[kCross])
                                                  : place(Shape::Rectangle, 0.3, 0.45, kTile, kColours[kTile]));
                    emit(spec, split, "grounds");
                }
            }
            for (int k = 0; k < 2; ++k) {
                SyntheticSceneSpec spec;
                spec.width = spec.height = kSide;
                spec.background = solid(kEmblemGround);
                spec.background_category = kEmblem;
                spec.placements.push_back(place(Shape::Saltire, 0.35, 0.55, kEmblem, kColours[kEmblem]));
                emit(spec, split, "emblems");
            }
        }
    }
    std::ofstream(out_dir / "manifest.jsonl", std::ios::binary) << manifest_text(manifest, out_dir);
    return load_manifest(out_dir / "manifest.jsonl");
}

}  // namespace scene::testing
