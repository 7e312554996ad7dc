#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "scene/adaptive.hpp"
#include "scene/config.hpp"
#include "scene/eval.hpp"
#include "scene/plsa.hpp"

namespace scene {

/// Named row-major matrix of doubles.
struct Blob {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;
};

/// Container layout: 8-byte magic, u32 version, u64 header length, canonical
/// JSON header (sorted keys, lists the blobs), then per blob u64 rows, u64 cols
/// and rows*cols little-endian f64 values.
std::vector<std::uint8_t> encode_container(std::string_view magic, std::uint32_t version, nlohmann::json header,
                                           const std::vector<Blob>& blobs);

struct DecodedContainer {
    std::uint32_t version = 0;
    nlohmann::json header;
    std::vector<Blob> blobs;

    const Blob& blob(std::string_view name) const;
};

/// Throws DataError on a wrong magic, a version other than `expected_version`,
/// or truncated data.
DecodedContainer decode_container(std::span<const std::uint8_t> bytes, std::string_view magic,
                                  std::uint32_t expected_version);

inline constexpr std::string_view kBundleMagic = "SCNBNDL1";
inline constexpr std::uint32_t kBundleVersion = 1;
inline constexpr std::string_view kMatrixMagic = "SCNMTRX1";
inline constexpr std::uint32_t kMatrixVersion = 1;

struct BundleProvenance {
    std::uint64_t seed = 0;
    std::string dataset_hash;
    long train_regions = 0;
    long pretest_regions = 0;
    long skipped_regions = 0;  // ground-truth regions below the minimum area
};

/// Trained artefacts: pLSA-O, topic names, strategy map, classifier, the
/// configuration used and the pre-test tables.
struct ModelBundle {
    PlsaModel plsa;
    std::vector<int> topic_category;
    std::vector<std::string> category_names;
    StrategyMap strategy_map;
    PaddingClassifier classifier;
    Config config;
    BundleProvenance provenance;
    std::array<ConfusionTable, 4> pretest_confusion;  // indexed by Combination
};

std::vector<std::uint8_t> serialize(const ModelBundle& bundle);
ModelBundle deserialize(std::span<const std::uint8_t> bytes);

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::filesystem::path& path);

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);

}  // namespace scene
