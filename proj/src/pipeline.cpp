#include "scene/pipeline.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "scene/error.hpp"
#include "scene/image_io.hpp"
#include "scene/padding.hpp"

namespace fs = std::filesystem;

namespace scene {

namespace {

constexpr std::uint64_t kClassifierStream = 0x9e3779b97f4a7c15ULL;

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text.data(), text.size()); }

std::size_t entry_index(const DatasetManifest& m, const ManifestEntry* e) {
    return static_cast<std::size_t>(e - m.entries.data());
}

struct ImageFeatures {
    std::vector<FeatureVector> original;
    std::vector<FeatureVector> zero;
    std::vector<int> categories;
    std::vector<long> ids;
    std::vector<std::uint32_t> labels;
    long skipped = 0;
};

}  // namespace

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

long region_key(std::size_t entry, std::uint32_t label) noexcept {
    return static_cast<long>(entry) * 65536L + static_cast<long>(label);
}

SplitFeatures extract_split(const DatasetManifest& manifest, std::string_view split, const Config& cfg) {
    const auto entries = manifest.split(split);
    const DescriptorConfig dcfg = descriptor_config(cfg);
    std::vector<ImageFeatures> per_image(entries.size());

    parallel_for(entries.size(), cfg.jobs, [&](std::size_t i) {
        const ManifestEntry& e = *entries[i];
        const std::size_t idx = entry_index(manifest, &e);
        auto image = std::make_shared<const RasterImage>(read_png_rgb(e.image));
        const RegionMask mask = read_png_mask(e.mask);
        if (mask.width() != image->width() || mask.height() != image->height())
            throw DataError(e.mask.string() + ": mask size differs from image " + e.image.string());
        if (mask.region_count() > e.region_categories.size())
            throw DataError(e.mask.string() + ": mask has labels without a category");
        const double min_area = cfg.min_area_fraction * static_cast<double>(image->pixel_count());
        ImageFeatures& out = per_image[i];
        for (const Region& region : extract_regions(mask, image)) {
            if (static_cast<double>(region.area) < min_area) {
                ++out.skipped;
                continue;
            }
            const long key = region_key(idx, region.id);
            try {
                out.original.push_back(cedd(pad(region, PaddingStrategy::PadOriginal), dcfg));
                out.zero.push_back(cedd(pad(region, PaddingStrategy::PadZero), dcfg));
            } catch (const DegenerateRegionError& err) {
                throw DegenerateRegionError(e.image.string() + ": region " + std::to_string(key) + " (label " +
                                                std::to_string(region.id) + "): " + err.what(),
                                            key);
            }
            out.categories.push_back(e.region_categories[region.id]);
            out.ids.push_back(key);
            out.labels.push_back(region.id);
        }
    });

    SplitFeatures sf;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        ImageFeatures& f = per_image[i];
        for (std::size_t r = 0; r < f.categories.size(); ++r) {
            sf.features.pad_original.push_back(f.original[r]);
            sf.features.pad_zero.push_back(f.zero[r]);
            sf.features.categories.push_back(f.categories[r]);
            sf.features.region_ids.push_back(f.ids[r]);
            sf.refs.push_back({entries[i], f.labels[r]});
        }
        sf.skipped += f.skipped;
    }
    return sf;
}

TrainResult train_pipeline(const DatasetManifest& manifest, const Config& cfg, std::string dataset_hash) {
    cfg.validate();
    const int C = static_cast<int>(manifest.categories.size());
    if (C < 2) throw DataError("train: need at least 2 categories, manifest has " + std::to_string(C));
    const SplitFeatures train = extract_split(manifest, "train", cfg);
    const SplitFeatures held = extract_split(manifest, "pretest", cfg);
    if (train.features.size() == 0) throw DataError("train: the train split has no usable regions");
    if (held.features.size() == 0) throw DataError("train: the pretest split has no usable regions");

    PretestOptions popts;
    popts.plsa = train_options(cfg, C);
    popts.fold = fold_options(cfg);
    popts.term_scale = cfg.term_scale;
    PretestResult pr = pretest(train.features, held.features, C, popts);

    ClassifierOptions copts;
    copts.reg = cfg.classifier_reg;
    copts.epochs = cfg.classifier_epochs;
    copts.seed = cfg.seed ^ kClassifierStream;

    TrainResult out;
    ModelBundle& b = out.bundle;
    b.classifier = train_padding_classifier(train.features.pad_original, train.features.categories, pr.strategy_map,
                                            copts);
    for (auto combo : kCombinations) {
        std::vector<std::pair<int, int>> pairs;
        for (const auto& rec : pr.records) {
            const int predicted = rec.outcome[static_cast<std::size_t>(combo)].predicted;
            if (predicted >= 0) pairs.emplace_back(rec.category, predicted);
        }
        b.pretest_confusion[static_cast<std::size_t>(combo)] = confusion(pairs, C);
    }
    b.plsa = std::move(pr.model_original);
    b.topic_category = std::move(pr.topic_category_original);
    b.category_names = manifest.categories;
    b.strategy_map = std::move(pr.strategy_map);
    b.config = cfg;
    b.provenance.seed = cfg.seed;
    b.provenance.dataset_hash = std::move(dataset_hash);
    b.provenance.train_regions = static_cast<long>(train.features.size());
    b.provenance.pretest_regions = static_cast<long>(held.features.size());
    b.provenance.skipped_regions = train.skipped + held.skipped;
    out.pretest = pretest_table(b.strategy_map.provenance);
    return out;
}

AnnotatorConfig bundle_annotator_config(const ModelBundle& bundle, double tau) {
    AnnotatorConfig a = annotator_config(bundle.config);
    a.tau = tau;
    return a;
}

SceneAnnotation annotate_with_bundle(const ModelBundle& bundle, const RasterImage& image, double tau,
                                     std::string image_ref) {
    const AnnotationModel model{bundle.plsa, bundle.topic_category, bundle.classifier};
    const auto palette = default_palette(bundle.category_names.size());
    SceneAnnotation a = annotate(image, model, bundle_annotator_config(bundle, tau), palette, bundle.category_names);
    a.image_ref = std::move(image_ref);
    return a;
}

void write_annotation(const SceneAnnotation& annotation, const ModelBundle& bundle, const fs::path& out_dir,
                      const std::string& stem) {
    write_png_rgb(out_dir / (stem + ".annotated.png"), annotation.overlay);
    write_text(out_dir / (stem + ".json"), to_json(annotation, bundle.category_names).dump(2) + "\n");
}

EvaluationReport evaluate_pipeline(const ModelBundle& bundle, const DatasetManifest& manifest, const Config& cfg) {
    const auto entries = manifest.split("test");
    if (entries.empty()) throw DataError("evaluate: the manifest has no test split with ground truth");
    if (manifest.categories.size() != bundle.category_names.size())
        throw DataError("evaluate: manifest and bundle disagree on the category table");
    const int C = static_cast<int>(manifest.categories.size());

    EvaluationReport report;
    report.pretest = pretest_table(bundle.strategy_map.provenance);
    report.confusion = bundle.pretest_confusion;

    // Adaptive vs fixed paddings on ground-truth test regions, pLSA-O only.
    Config extract_cfg = bundle.config;
    extract_cfg.jobs = cfg.jobs;
    const SplitFeatures test = extract_split(manifest, "test", extract_cfg);
    const FoldInOptions fold = fold_options(bundle.config);
    std::vector<PretestRecord> records(test.features.size());
    std::vector<PaddingStrategy> decisions(test.features.size());
    parallel_for(records.size(), cfg.jobs, [&](std::size_t i) {
        PretestRecord& rec = records[i];
        rec.region_id = test.features.region_ids[i];
        rec.category = test.features.categories[i];
        for (auto combo : {Combination::OO, Combination::OZ}) {
            FoldInResult fr = fold_in(bundle.plsa, test.features.under(test_side(combo))[i], fold);
            RankingOutcome& o = rec.outcome[static_cast<std::size_t>(combo)];
            o.predicted = predicted_category(fr.ranking, bundle.topic_category);
            o.posterior = std::move(fr.posterior);
            o.ranking = std::move(fr.ranking);
        }
        decisions[i] = select_strategy(bundle.classifier, test.features.pad_original[i]);
    });
    report.adaptive = compare_adaptive(records, bundle.strategy_map, decisions);

    // End-to-end annotation of the test images.
    struct ImageScore {
        std::vector<std::pair<int, std::optional<int>>> predictions;
        double recovery = 0.0;
    };
    std::vector<ImageScore> scores(entries.size());
    parallel_for(entries.size(), cfg.jobs, [&](std::size_t i) {
        const ManifestEntry& e = *entries[i];
        const RasterImage image = read_png_rgb(e.image);
        const RegionMask truth = read_png_mask(e.mask);
        const SceneAnnotation a = annotate_with_bundle(bundle, image, cfg.tau, e.image.string());
        const auto majority = majority_categories(truth, e.region_categories, a.mask);
        ImageScore& s = scores[i];
        s.recovery = region_recovery(truth, a.mask);
        for (const auto& r : a.regions)
            if (!r.filtered) s.predictions.emplace_back(majority[r.region_id], r.tag);
    });
    std::vector<std::pair<int, std::optional<int>>> all;
    report.min_recovery = 1.0;
    for (const auto& s : scores) {
        all.insert(all.end(), s.predictions.begin(), s.predictions.end());
        report.mean_recovery += s.recovery;
        report.min_recovery = std::min(report.min_recovery, s.recovery);
    }
    report.images = static_cast<long>(entries.size());
    report.mean_recovery /= static_cast<double>(entries.size());
    report.regions_scored = static_cast<long>(all.size());
    report.prf = prf(all, C);
    return report;
}

void write_reports(const EvaluationReport& r, const std::vector<std::string>& names, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw DataError("evaluate: cannot create " + out_dir.string() + ": " + ec.message());
    write_text(out_dir / "pretest.csv", to_csv(r.pretest, names));
    const char* suffix[4] = {"oo", "zz", "oz", "zo"};
    nlohmann::json confusion_json = nlohmann::json::object();
    for (auto c : kCombinations) {
        const auto& t = r.confusion[static_cast<std::size_t>(c)];
        write_text(out_dir / ("confusion_" + std::string(suffix[static_cast<int>(c)]) + ".csv"),
                   to_csv(t, names));
        confusion_json[std::string(to_string(c))] = to_json(t);
    }
    write_text(out_dir / "adaptive.csv", to_csv(r.adaptive));
    write_text(out_dir / "prf.csv", to_csv(r.prf, names));
    const nlohmann::json j = {{"categories", names},
                              {"pretest", to_json(r.pretest)},
                              {"pretest_confusion", confusion_json},
                              {"adaptive", to_json(r.adaptive)},
                              {"prf", to_json(r.prf)},
                              {"segmentation", {{"mean_recovery", r.mean_recovery}, {"min_recovery", r.min_recovery}}},
                              {"images", r.images},
                              {"regions_scored", r.regions_scored}};
    write_text(out_dir / "report.json", j.dump(2) + "\n");
}

}  // namespace scene
