#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scene/annotator.hpp"
#include "scene/plsa.hpp"

namespace scene {

/// Every tunable of the pipeline. Defaults are the built-in layer.
struct Config {
    // segmentation
    double tm = 0.55;
    std::vector<int> window_sizes = {9};
    double j_threshold_stddevs = 0.2;
    int min_region_px = 64;
    // description
    int block_size = 8;
    double edge_threshold = 0.05;
    // annotation
    double tau = 0.3;
    double min_area_fraction = 0.01;
    // pLSA
    int topics = 0;  // 0: one topic per category
    int max_iters = 500;
    double tol = 1e-6;
    int restarts = 3;
    std::uint64_t seed = 1;
    double term_scale = 100.0;
    int fold_iters = 500;
    double fold_tol = 1e-9;
    // padding classifier
    double classifier_reg = 1e-3;
    int classifier_epochs = 200;
    // execution
    int jobs = 1;

    /// Throws ContractError on out-of-range values.
    void validate() const;
};

/// Values given on the command line; unset fields defer to lower layers.
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> tau;
    std::optional<double> tm;
    std::optional<int> jobs;
};

/// Applies the keys of a JSON object onto `cfg`. Unknown keys are a DataError.
void apply_json(Config& cfg, const nlohmann::json& j);
Config load_config_file(const std::filesystem::path& path);

/// Built-in defaults, then the optional file, then command-line overrides.
Config resolve_config(const std::optional<std::filesystem::path>& file, const ConfigOverrides& cli);

nlohmann::json to_json(const Config& cfg);

SegmenterConfig segmenter_config(const Config& cfg);
DescriptorConfig descriptor_config(const Config& cfg);
AnnotatorConfig annotator_config(const Config& cfg);
TrainOptions train_options(const Config& cfg, int num_categories);
FoldInOptions fold_options(const Config& cfg);

}  // namespace scene
