#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "scene/adaptive.hpp"
#include "scene/annotator.hpp"
#include "scene/bundle.hpp"
#include "scene/config.hpp"
#include "scene/eval.hpp"
#include "scene/manifest.hpp"

namespace scene {

/// Runs fn(0..n-1) on up to `jobs` threads. Rethrows the exception of the
/// lowest failing index.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Stable region key: entry index * 65536 + mask label.
long region_key(std::size_t entry, std::uint32_t label) noexcept;

struct RegionRef {
    const ManifestEntry* entry = nullptr;
    std::uint32_t label = 0;
};

/// Ground-truth regions of one split described under both paddings.
struct SplitFeatures {
    LabeledFeatures features;
    std::vector<RegionRef> refs;
    long skipped = 0;  // below the minimum area
};

/// Degenerate regions surface as DegenerateRegionError naming the image and region key.
SplitFeatures extract_split(const DatasetManifest& manifest, std::string_view split, const Config& cfg);

struct TrainResult {
    ModelBundle bundle;
    PretestTable pretest;
};

/// Describes the train split, trains pLSA-O and pLSA-Z, pre-tests on the
/// pretest split, builds the strategy map and trains the padding classifier.
/// Keeps only pLSA-O. Fewer than two categories is a DataError.
TrainResult train_pipeline(const DatasetManifest& manifest, const Config& cfg, std::string dataset_hash = {});

/// Annotation settings from the bundle's configuration with the given threshold.
AnnotatorConfig bundle_annotator_config(const ModelBundle& bundle, double tau);

SceneAnnotation annotate_with_bundle(const ModelBundle& bundle, const RasterImage& image, double tau,
                                     std::string image_ref = {});

/// Writes <out>/<stem>.annotated.png and <out>/<stem>.json.
void write_annotation(const SceneAnnotation& annotation, const ModelBundle& bundle,
                      const std::filesystem::path& out_dir, const std::string& stem);

struct EvaluationReport {
    PretestTable pretest;                       // from the bundle
    std::array<ConfusionTable, 4> confusion;    // pre-test confusion, from the bundle
    AdaptiveComparison adaptive;                // test split, ground-truth regions
    PrfReport prf;                              // test split, end-to-end annotation
    double mean_recovery = 0.0;                 // segmentation vs ground truth
    double min_recovery = 0.0;
    long images = 0;
    long regions_scored = 0;                    // segmented regions above the area filter
};

/// Needs a non-empty test split; DataError otherwise.
EvaluationReport evaluate_pipeline(const ModelBundle& bundle, const DatasetManifest& manifest, const Config& cfg);

/// pretest, confusion_{oo,zz,oz,zo}, adaptive and prf as CSV, plus report.json.
void write_reports(const EvaluationReport& report, const std::vector<std::string>& names,
                   const std::filesystem::path& out_dir);

}  // namespace scene
