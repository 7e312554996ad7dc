#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "scene/corpus.hpp"

namespace scene {

inline constexpr const char* kManifestFormat = "scene-annotate-manifest";
inline constexpr int kManifestVersion = 1;

struct ManifestEntry {
    std::filesystem::path image;  // absolute after load
    std::filesystem::path mask;
    std::vector<int> region_categories;  // indexed by mask label
    std::string split;                   // train | pretest | test
    std::string scene;                   // optional scene name
};

/// JSON Lines: a header line {"format","version","categories","scenes"}, then
/// one entry per image with paths relative to the manifest's directory.
struct DatasetManifest {
    std::vector<std::string> categories;
    std::vector<std::string> scenes;
    std::vector<ManifestEntry> entries;

    std::vector<const ManifestEntry*> split(std::string_view name) const;
    /// Images and regions per split.
    std::map<std::string, std::pair<std::size_t, std::size_t>> split_sizes() const;
};

/// Parses and validates: known splits, category ids in range, referenced files
/// present, and (when `check_masks`) every mask label has a category.
DatasetManifest load_manifest(const std::filesystem::path& path, bool check_masks = true);

/// Canonical text with paths written relative to `base_dir`.
std::string manifest_text(const DatasetManifest& manifest, const std::filesystem::path& base_dir);

/// 64-bit FNV-1a over the manifest text and every referenced file, as hex.
std::string dataset_hash(const DatasetManifest& manifest, const std::filesystem::path& base_dir);

struct SynthOptions {
    bool solid_only = false;  // plain fills instead of textures
};

/// Writes images/, masks/ and manifest.jsonl under `out_dir`. Byte-identical on rerun.
DatasetManifest synthesize_dataset(const SceneRecipe& recipe, const std::filesystem::path& out_dir,
                                   const SynthOptions& options = {});

inline constexpr const char* kSplitNames[3] = {"train", "pretest", "test"};

}  // namespace scene
