#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scene/raster.hpp"

namespace scene {

/// How one category looks in synthetic scenes.
struct CategoryStyle {
    std::string name;
    Fill fill;
    std::vector<Shape> shapes = {Shape::Rectangle};
};

/// Objects of one category dropped onto a scene's background.
struct ObjectSlot {
    int category = 0;
    int min_count = 1;
    int max_count = 1;
    double min_size = 0.3;  // fraction of canvas side
    double max_size = 0.5;
    bool anchor_bottom = false;  // sit on the bottom edge
    bool full_width = false;     // span the whole canvas width
};

struct SceneTemplate {
    std::string name;
    int background_category = 0;
    std::vector<ObjectSlot> objects;
    int train_images = 0;
    int pretest_images = 0;
    int test_images = 0;
};

struct SceneRecipe {
    int width = 128;
    int height = 96;
    std::uint64_t seed = 0;
    int colour_jitter = 0;  // +/- per-image shift of every category colour
    std::vector<CategoryStyle> categories;
    std::vector<SceneTemplate> scenes;
};

/// Five scenes sharing eight categories, at roughly a tenth of the reference
/// collection's size, plus twelve test images per scene.
SceneRecipe builtin_recipe();

/// Deterministic scene for (scene index, image index, split tag) under the recipe seed.
SyntheticSceneSpec sample_scene(const SceneRecipe& recipe, std::size_t scene_index, std::uint64_t image_key,
                                bool solid_only = false);

/// Per-image key: distinct for every (scene, split, index) triple.
std::uint64_t image_key(std::size_t scene_index, int split, int index) noexcept;

void to_json(nlohmann::json& j, const SceneRecipe& r);
void from_json(const nlohmann::json& j, SceneRecipe& r);

}  // namespace scene
