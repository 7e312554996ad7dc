#include "scene/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "scene/error.hpp"

namespace scene {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    if (hi <= lo) return lo;
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint8_t shift(std::uint8_t v, int d) { return static_cast<std::uint8_t>(std::clamp(v + d, 0, 255)); }

Fill jittered(Fill f, int d) {
    f.primary = {shift(f.primary.r, d), shift(f.primary.g, d), shift(f.primary.b, d)};
    f.secondary = {shift(f.secondary.r, d), shift(f.secondary.g, d), shift(f.secondary.b, d)};
    return f;
}

bool overlaps(const Placement& a, const Placement& b, int margin) {
    return a.x < b.x + b.width + margin && b.x < a.x + a.width + margin && a.y < b.y + b.height + margin &&
           b.y < a.y + a.height + margin;
}

Fill make_fill(FillKind kind, Rgb primary, Rgb secondary = {}, int period = 2,
               StripeOrientation orientation = StripeOrientation::Vertical, int noise = 0) {
    Fill f;
    f.kind = kind;
    f.primary = primary;
    f.secondary = secondary;
    f.period = period;
    f.orientation = orientation;
    f.noise_amplitude = noise;
    return f;
}

}  // namespace

std::uint64_t image_key(std::size_t scene_index, int split, int index) noexcept {
    return (static_cast<std::uint64_t>(scene_index) << 40) ^ (static_cast<std::uint64_t>(split) << 32) ^
           static_cast<std::uint64_t>(index);
}

SceneRecipe builtin_recipe() {
    SceneRecipe r;
    r.width = 128;
    r.height = 96;
    r.seed = 20110101;
    r.colour_jitter = 8;
    using S = Shape;
    r.categories = {
        {"butterfly", make_fill(FillKind::Stripes, {235, 135, 20}, {25, 20, 20}, 2), {S::Diamond, S::Ellipse}},
        {"leaves", make_fill(FillKind::Noise, {45, 135, 45}, {}, 2, StripeOrientation::Vertical, 18), {S::Rectangle}},
        {"flower", make_fill(FillKind::Noise, {215, 40, 175}, {}, 2, StripeOrientation::Vertical, 6), {S::Ellipse}},
        {"flight", make_fill(FillKind::Solid, {238, 238, 242}), {S::Cross, S::Rectangle}},
        {"sky", make_fill(FillKind::Noise, {110, 165, 235}, {}, 2, StripeOrientation::Vertical, 4), {S::Rectangle}},
        {"mountain", make_fill(FillKind::Noise, {125, 80, 45}, {}, 2, StripeOrientation::Vertical, 8), {S::Triangle, S::Rectangle}},
        {"plants", make_fill(FillKind::Stripes, {150, 190, 40}, {95, 125, 25}, 3, StripeOrientation::Horizontal),
         {S::Rectangle}},
        {"cats", make_fill(FillKind::Noise, {128, 128, 132}, {}, 2, StripeOrientation::Vertical, 28),
         {S::Ellipse, S::Rectangle}},
    };
    // category ids: 0 butterfly, 1 leaves, 2 flower, 3 flight, 4 sky, 5 mountain, 6 plants, 7 cats
    r.scenes = {
        {"butterfly", 1, {{0, 1, 1, 0.35, 0.55}, {2, 0, 1, 0.25, 0.35}}, 16, 4, 12},
        {"flight", 4, {{3, 1, 2, 0.25, 0.40}}, 12, 3, 12},
        {"flower", 6, {{2, 1, 3, 0.25, 0.40}}, 10, 3, 12},
        {"mountain", 4, {{6, 1, 1, 0.22, 0.28, true, true}, {5, 1, 1, 0.45, 0.65}}, 14, 4, 12},
        {"cats", 1, {{7, 1, 1, 0.35, 0.55}}, 14, 4, 12},
    };
    return r;
}

SyntheticSceneSpec sample_scene(const SceneRecipe& recipe, std::size_t scene_index, std::uint64_t key,
                                bool solid_only) {
    if (scene_index >= recipe.scenes.size()) throw ContractError("sample_scene: scene index out of range");
    const SceneTemplate& tpl = recipe.scenes[scene_index];
    auto style = [&](int category) -> const CategoryStyle& {
        if (category < 0 || static_cast<std::size_t>(category) >= recipe.categories.size())
            throw DataError("scene recipe: unknown category " + std::to_string(category));
        return recipe.categories[static_cast<std::size_t>(category)];
    };
    auto finish = [&](Fill f) {
        if (solid_only) f.kind = FillKind::Solid;
        return f;
    };

    std::mt19937_64 rng(splitmix64(recipe.seed ^ splitmix64(key)));
    SyntheticSceneSpec spec;
    spec.width = recipe.width;
    spec.height = recipe.height;
    spec.seed = splitmix64(recipe.seed + key);
    spec.background_category = tpl.background_category;
    spec.background = finish(jittered(style(tpl.background_category).fill,
                                      uniform_int(rng, -recipe.colour_jitter, recipe.colour_jitter)));

    const int W = recipe.width;
    const int H = recipe.height;
    for (const auto& slot : tpl.objects) {
        const CategoryStyle& st = style(slot.category);
        const int count = uniform_int(rng, slot.min_count, slot.max_count);
        for (int n = 0; n < count; ++n) {
            const Shape shape = st.shapes[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(st.shapes.size()) - 1))];
            const Fill fill = finish(jittered(st.fill, uniform_int(rng, -recipe.colour_jitter, recipe.colour_jitter)));
            for (int attempt = 0; attempt < 50; ++attempt) {
                Placement p;
                p.shape = shape;
                p.fill = fill;
                p.category = slot.category;
                p.width = slot.full_width ? W : std::max(8, static_cast<int>(std::lround(uniform_real(rng, slot.min_size, slot.max_size) * W)));
                p.height = std::max(8, static_cast<int>(std::lround(uniform_real(rng, slot.min_size, slot.max_size) * H)));
                p.width = std::min(p.width, W);
                p.height = std::min(p.height, H);
                p.x = slot.full_width ? 0 : uniform_int(rng, 0, W - p.width);
                p.y = slot.anchor_bottom ? H - p.height : uniform_int(rng, 0, H - p.height);
                const bool clash = std::any_of(spec.placements.begin(), spec.placements.end(), [&](const Placement& q) {
                    return overlaps(p, q, 2);
                });
                if (clash) continue;
                spec.placements.push_back(p);
                break;
            }
        }
    }
    return spec;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

const char* shape_name(Shape s) {
    switch (s) {
        case Shape::Rectangle: return "rectangle";
        case Shape::Ellipse: return "ellipse";
        case Shape::Triangle: return "triangle";
        case Shape::Diamond: return "diamond";
        case Shape::Cross: return "cross";
        case Shape::Saltire: return "saltire";
    }
    return "rectangle";
}

Shape parse_shape(const std::string& s) {
    if (s == "rectangle") return Shape::Rectangle;
    if (s == "ellipse") return Shape::Ellipse;
    if (s == "triangle") return Shape::Triangle;
    if (s == "diamond") return Shape::Diamond;
    if (s == "cross") return Shape::Cross;
    if (s == "saltire") return Shape::Saltire;
    throw DataError("scene recipe: unknown shape '" + s + "'");
}

const char* fill_name(FillKind k) {
    switch (k) {
        case FillKind::Solid: return "solid";
        case FillKind::Stripes: return "stripes";
        case FillKind::Noise: return "noise";
    }
    return "solid";
}

FillKind parse_fill(const std::string& s) {
    if (s == "solid") return FillKind::Solid;
    if (s == "stripes") return FillKind::Stripes;
    if (s == "noise") return FillKind::Noise;
    throw DataError("scene recipe: unknown fill '" + s + "'");
}

nlohmann::json rgb_json(Rgb c) { return nlohmann::json::array({c.r, c.g, c.b}); }

Rgb parse_rgb(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) throw DataError("scene recipe: colours are [r, g, b]");
    return {j[0].get<std::uint8_t>(), j[1].get<std::uint8_t>(), j[2].get<std::uint8_t>()};
}

}  // namespace

void to_json(nlohmann::json& j, const SceneRecipe& r) {
    j = nlohmann::json::object();
    j["width"] = r.width;
    j["height"] = r.height;
    j["seed"] = r.seed;
    j["colour_jitter"] = r.colour_jitter;
    auto& cats = j["categories"] = nlohmann::json::array();
    for (const auto& c : r.categories) {
        nlohmann::json shapes = nlohmann::json::array();
        for (auto s : c.shapes) shapes.push_back(shape_name(s));
        cats.push_back({{"name", c.name},
                        {"shapes", shapes},
                        {"fill",
                         {{"kind", fill_name(c.fill.kind)},
                          {"primary", rgb_json(c.fill.primary)},
                          {"secondary", rgb_json(c.fill.secondary)},
                          {"period", c.fill.period},
                          {"orientation", c.fill.orientation == StripeOrientation::Vertical ? "vertical" : "horizontal"},
                          {"noise", c.fill.noise_amplitude}}}});
    }
    auto& scenes = j["scenes"] = nlohmann::json::array();
    for (const auto& s : r.scenes) {
        nlohmann::json objects = nlohmann::json::array();
        for (const auto& o : s.objects)
            objects.push_back({{"category", o.category},
                               {"min_count", o.min_count},
                               {"max_count", o.max_count},
                               {"min_size", o.min_size},
                               {"max_size", o.max_size},
                               {"anchor_bottom", o.anchor_bottom},
                               {"full_width", o.full_width}});
        scenes.push_back({{"name", s.name},
                          {"background", s.background_category},
                          {"objects", objects},
                          {"train", s.train_images},
                          {"pretest", s.pretest_images},
                          {"test", s.test_images}});
    }
}

void from_json(const nlohmann::json& j, SceneRecipe& r) {
    try {
        r = SceneRecipe{};
        r.width = j.value("width", 128);
        r.height = j.value("height", 96);
        r.seed = j.value("seed", std::uint64_t{0});
        r.colour_jitter = j.value("colour_jitter", 0);
        for (const auto& c : j.value("categories", nlohmann::json::array())) {
            CategoryStyle st;
            st.name = c.at("name").get<std::string>();
            st.shapes.clear();
            for (const auto& s : c.value("shapes", nlohmann::json::array({"rectangle"})))
                st.shapes.push_back(parse_shape(s.get<std::string>()));
            if (st.shapes.empty()) throw DataError("scene recipe: category '" + st.name + "' has no shapes");
            const auto& f = c.at("fill");
            st.fill.kind = parse_fill(f.value("kind", std::string("solid")));
            st.fill.primary = parse_rgb(f.at("primary"));
            if (f.contains("secondary")) st.fill.secondary = parse_rgb(f.at("secondary"));
            st.fill.period = f.value("period", 2);
            st.fill.orientation = f.value("orientation", std::string("vertical")) == "horizontal"
                                      ? StripeOrientation::Horizontal
                                      : StripeOrientation::Vertical;
            st.fill.noise_amplitude = f.value("noise", 0);
            r.categories.push_back(std::move(st));
        }
        for (const auto& s : j.value("scenes", nlohmann::json::array())) {
            SceneTemplate t;
            t.name = s.at("name").get<std::string>();
            t.background_category = s.at("background").get<int>();
            for (const auto& o : s.value("objects", nlohmann::json::array())) {
                ObjectSlot slot;
                slot.category = o.at("category").get<int>();
                slot.min_count = o.value("min_count", 1);
                slot.max_count = o.value("max_count", slot.min_count);
                slot.min_size = o.value("min_size", 0.3);
                slot.max_size = o.value("max_size", slot.min_size);
                slot.anchor_bottom = o.value("anchor_bottom", false);
                slot.full_width = o.value("full_width", false);
                t.objects.push_back(slot);
            }
            t.train_images = s.value("train", 0);
            t.pretest_images = s.value("pretest", 0);
            t.test_images = s.value("test", 0);
            r.scenes.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("scene recipe: ") + e.what());
    }
    const int n = static_cast<int>(r.categories.size());
    for (const auto& s : r.scenes) {
        if (s.background_category < 0 || s.background_category >= n)
            throw DataError("scene recipe: scene '" + s.name + "' has an unknown background category");
        for (const auto& o : s.objects)
            if (o.category < 0 || o.category >= n)
                throw DataError("scene recipe: scene '" + s.name + "' references an unknown category");
    }
}

}  // namespace scene
