#include "scene/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scene/error.hpp"
#include "scene/image_io.hpp"

namespace fs = std::filesystem;

namespace scene {

namespace {

bool known_split(const std::string& s) {
    for (const char* name : kSplitNames)
        if (s == name) return true;
    return false;
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string relative_text(const fs::path& p, const fs::path& base) {
    return p.lexically_relative(base).generic_string();
}

}  // namespace

std::vector<const ManifestEntry*> DatasetManifest::split(std::string_view name) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
        if (e.split == name) out.push_back(&e);
    return out;
}

std::map<std::string, std::pair<std::size_t, std::size_t>> DatasetManifest::split_sizes() const {
    std::map<std::string, std::pair<std::size_t, std::size_t>> out;
    for (const char* name : kSplitNames) out[name] = {0, 0};
    for (const auto& e : entries) {
        auto& s = out[e.split];
        ++s.first;
        s.second += e.region_categories.size();
    }
    return out;
}

DatasetManifest load_manifest(const fs::path& path, bool check_masks) {
    std::ifstream in(path);
    if (!in) throw DataError("manifest: cannot open " + path.string());
    const fs::path base = fs::absolute(path).parent_path();
    DatasetManifest m;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("manifest: " + where + e.what());
        }
        try {
            if (!header_seen) {
                if (j.value("format", std::string()) != kManifestFormat)
                    throw DataError("manifest: " + where + "first line must be the manifest header");
                if (j.at("version").get<int>() != kManifestVersion)
                    throw DataError("manifest: " + where + "unsupported version " + j.at("version").dump());
                m.categories = j.at("categories").get<std::vector<std::string>>();
                m.scenes = j.value("scenes", std::vector<std::string>{});
                header_seen = true;
                continue;
            }
            ManifestEntry e;
            e.image = (base / j.at("image").get<std::string>()).lexically_normal();
            e.mask = (base / j.at("mask").get<std::string>()).lexically_normal();
            e.split = j.at("split").get<std::string>();
            e.scene = j.value("scene", std::string());
            if (!known_split(e.split)) throw DataError("manifest: " + where + "unknown split '" + e.split + "'");
            const auto& regions = j.at("regions");
            e.region_categories.assign(regions.size(), -1);
            for (const auto& r : regions) {
                const auto label = r.at("label").get<std::size_t>();
                const int category = r.at("category").get<int>();
                if (label >= regions.size() || e.region_categories[label] != -1)
                    throw DataError("manifest: " + where + "region labels must be 0..R-1 without repeats");
                if (category < 0 || static_cast<std::size_t>(category) >= m.categories.size())
                    throw DataError("manifest: " + where + "category " + std::to_string(category) + " out of range");
                e.region_categories[label] = category;
            }
            if (!fs::exists(e.image)) throw DataError("manifest: " + where + "missing image " + e.image.string());
            if (!fs::exists(e.mask)) throw DataError("manifest: " + where + "missing mask " + e.mask.string());
            if (check_masks) {
                const RegionMask mask = read_png_mask(e.mask);
                if (mask.region_count() > e.region_categories.size())
                    throw DataError("manifest: " + where + "mask has " + std::to_string(mask.region_count()) +
                                    " labels but only " + std::to_string(e.region_categories.size()) +
                                    " categorized regions");
            }
            m.entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw DataError("manifest: " + where + ex.what());
        }
    }
    if (!header_seen) throw DataError("manifest: " + path.string() + " has no header line");
    return m;
}

std::string manifest_text(const DatasetManifest& m, const fs::path& base_dir) {
    std::ostringstream os;
    nlohmann::json header = {{"format", kManifestFormat},
                             {"version", kManifestVersion},
                             {"categories", m.categories},
                             {"scenes", m.scenes}};
    os << header.dump() << '\n';
    const fs::path base = fs::absolute(base_dir);
    for (const auto& e : m.entries) {
        nlohmann::json regions = nlohmann::json::array();
        for (std::size_t l = 0; l < e.region_categories.size(); ++l)
            regions.push_back({{"label", l}, {"category", e.region_categories[l]}});
        nlohmann::json j = {{"image", relative_text(fs::absolute(e.image), base)},
                            {"mask", relative_text(fs::absolute(e.mask), base)},
                            {"regions", std::move(regions)},
                            {"split", e.split}};
        if (!e.scene.empty()) j["scene"] = e.scene;
        os << j.dump() << '\n';
    }
    return os.str();
}

std::string dataset_hash(const DatasetManifest& m, const fs::path& base_dir) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const std::string text = manifest_text(m, base_dir);
    h = fnv1a(h, text.data(), text.size());
    for (const auto& e : m.entries) {
        for (const auto& p : {e.image, e.mask}) {
            const std::string bytes = read_file(p);
            h = fnv1a(h, bytes.data(), bytes.size());
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

DatasetManifest synthesize_dataset(const SceneRecipe& recipe, const fs::path& out_dir, const SynthOptions& options) {
    std::error_code ec;
    fs::create_directories(out_dir / "images", ec);
    if (!ec) fs::create_directories(out_dir / "masks", ec);
    if (ec) throw DataError("synth: cannot create " + out_dir.string() + ": " + ec.message());

    DatasetManifest m;
    for (const auto& c : recipe.categories) m.categories.push_back(c.name);
    for (const auto& s : recipe.scenes) m.scenes.push_back(s.name);
    for (std::size_t si = 0; si < recipe.scenes.size(); ++si) {
        const SceneTemplate& tmpl = recipe.scenes[si];
        const int counts[3] = {tmpl.train_images, tmpl.pretest_images, tmpl.test_images};
        for (int split = 0; split < 3; ++split) {
            for (int i = 0; i < counts[split]; ++i) {
                const auto spec = sample_scene(recipe, si, image_key(si, split, i), options.solid_only);
                const SyntheticScene scene = generate_scene(spec);
                char stem[128];
                std::snprintf(stem, sizeof stem, "%s_%s_%03d.png", tmpl.name.c_str(), kSplitNames[split], i);
                ManifestEntry e;
                e.image = fs::absolute(out_dir / "images" / stem);
                e.mask = fs::absolute(out_dir / "masks" / stem);
                e.split = kSplitNames[split];
                e.scene = tmpl.name;
                e.region_categories = scene.categories;
                write_png_rgb(e.image, scene.image);
                write_png_mask(e.mask, scene.mask);
                m.entries.push_back(std::move(e));
            }
        }
    }
    const std::string text = manifest_text(m, out_dir);
    write_file_atomic(out_dir / "manifest.jsonl", text.data(), text.size());
    return m;
}

}  // namespace scene
