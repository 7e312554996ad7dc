// Command-line front end: synth, segment, extract, train, annotate, evaluate.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "scene/bundle.hpp"
#include "scene/corpus.hpp"
#include "scene/error.hpp"
#include "scene/image_io.hpp"
#include "scene/manifest.hpp"
#include "scene/pipeline.hpp"
#include "scene/segmenter.hpp"

namespace fs = std::filesystem;
using namespace scene;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct GlobalFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<double> tau;
    std::optional<double> tm;
    std::optional<int> jobs;
    std::string out;
};

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("scene");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("SCENE_ANNOTATE_LOG");
    spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

Config resolve(const GlobalFlags& g) {
    ConfigOverrides cli{g.seed, g.tau, g.tm, g.jobs};
    std::optional<fs::path> file;
    if (!g.config.empty()) file = g.config;
    return resolve_config(file, cli);
}

fs::path require_out(const GlobalFlags& g) {
    if (g.out.empty()) throw CLI::RequiredError("--out");
    fs::create_directories(g.out);
    return g.out;
}

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text.data(), text.size()); }

std::vector<fs::path> collect_images(const fs::path& input) {
    std::vector<fs::path> out;
    if (fs::is_directory(input)) {
        for (const auto& e : fs::directory_iterator(input)) {
            const auto name = e.path().filename().string();
            if (e.is_regular_file() && e.path().extension() == ".png" &&
                name.find(".annotated.") == std::string::npos)
                out.push_back(e.path());
        }
        std::sort(out.begin(), out.end());
    } else if (fs::exists(input)) {
        out.push_back(input);
    } else {
        throw DataError("no such image or directory: " + input.string());
    }
    return out;
}

void log_splits(const DatasetManifest& m) {
    for (const auto& [name, size] : m.split_sizes())
        spdlog::info("split {}: {} images, {} regions", name, size.first, size.second);
}

int cmd_synth(const GlobalFlags& g, const std::string& spec, bool solid) {
    const fs::path out = require_out(g);
    SceneRecipe recipe = builtin_recipe();
    if (spec != "builtin") {
        std::ifstream in(spec);
        if (!in) throw DataError("cannot open spec " + spec);
        nlohmann::json j;
        try {
            in >> j;
            recipe = j.get<SceneRecipe>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError("spec " + spec + ": " + e.what());
        }
    }
    if (g.seed) recipe.seed = *g.seed;
    const DatasetManifest m = synthesize_dataset(recipe, out, {solid});
    spdlog::info("wrote {} images, {} categories, {} scenes to {}", m.entries.size(), m.categories.size(),
                 m.scenes.size(), out.string());
    log_splits(m);
    return kExitOk;
}

int cmd_segment(const GlobalFlags& g, const std::vector<std::string>& inputs) {
    const Config cfg = resolve(g);
    const fs::path out = require_out(g);
    std::vector<fs::path> images;
    for (const auto& in : inputs)
        for (auto& p : collect_images(in)) images.push_back(std::move(p));
    const SegmenterConfig scfg = segmenter_config(cfg);
    std::vector<std::uint32_t> counts(images.size());
    parallel_for(images.size(), cfg.jobs, [&](std::size_t i) {
        const RegionMask mask = segment(read_png_rgb(images[i]), scfg);
        write_png_mask(out / (images[i].stem().string() + ".mask.png"), mask);
        counts[i] = mask.region_count();
    });
    for (std::size_t i = 0; i < images.size(); ++i)
        spdlog::info("{}: {} regions", images[i].filename().string(), counts[i]);
    return kExitOk;
}

int cmd_extract(const GlobalFlags& g, const std::string& manifest_path, const std::string& split) {
    const Config cfg = resolve(g);
    const fs::path out = require_out(g);
    const DatasetManifest m = load_manifest(manifest_path);
    const SplitFeatures sf = extract_split(m, split, cfg);
    const std::size_t n = sf.features.size();
    Blob po{"pad_original", n, static_cast<std::size_t>(kFeatureLength), {}};
    Blob pz{"pad_zero", n, static_cast<std::size_t>(kFeatureLength), {}};
    nlohmann::json rows = nlohmann::json::array();
    const fs::path base = fs::absolute(fs::path(manifest_path)).parent_path();
    for (std::size_t i = 0; i < n; ++i) {
        po.data.insert(po.data.end(), sf.features.pad_original[i].values.begin(), sf.features.pad_original[i].values.end());
        pz.data.insert(pz.data.end(), sf.features.pad_zero[i].values.begin(), sf.features.pad_zero[i].values.end());
        rows.push_back({{"id", sf.features.region_ids[i]},
                        {"image", sf.refs[i].entry->image.lexically_relative(base).generic_string()},
                        {"label", sf.refs[i].label},
                        {"category", sf.features.categories[i]}});
    }
    nlohmann::json header = {{"format", "scene-annotate-features"},
                             {"split", split},
                             {"categories", m.categories},
                             {"config", to_json(cfg)},
                             {"regions", rows},
                             {"skipped_regions", sf.skipped}};
    const auto bytes = encode_container(kMatrixMagic, kMatrixVersion, header, {po, pz});
    const fs::path path = out / ("features." + split + ".bin");
    write_file_atomic(path, bytes.data(), bytes.size());
    spdlog::info("{} regions ({} skipped below minimum area) -> {}", n, sf.skipped, path.string());
    return kExitOk;
}

int cmd_train(const GlobalFlags& g, const std::string& manifest_path) {
    const Config cfg = resolve(g);
    const fs::path out = require_out(g);
    const DatasetManifest m = load_manifest(manifest_path);
    log_splits(m);
    const TrainResult r = train_pipeline(m, cfg, dataset_hash(m, fs::path(manifest_path).parent_path()));
    const ModelBundle& b = r.bundle;
    for (const auto& w : b.plsa.warnings) spdlog::warn("{}", w);
    spdlog::info("pLSA-O: {} topics x {} features over {} regions, {} iterations, L = {}", b.plsa.topics,
                 b.plsa.features, b.plsa.regions, b.plsa.iterations,
                 b.plsa.loglik_trace.empty() ? 0.0 : b.plsa.loglik_trace.back());
    spdlog::info("pre-test totals O/O {} Z/Z {} O/Z {} Z/O {} of {}, ideal {}", r.pretest.total(Combination::OO),
                 r.pretest.total(Combination::ZZ), r.pretest.total(Combination::OZ), r.pretest.total(Combination::ZO),
                 r.pretest.test_total, r.pretest.ideal_total);
    spdlog::info("padding classifier training accuracy {:.3f}{}", b.classifier.training_accuracy,
                 b.classifier.degenerate ? " (single strategy)" : "");
    save_bundle(out / "model.bundle", b);
    std::string trace = "iteration,loglik\n";
    for (std::size_t i = 0; i < b.plsa.loglik_trace.size(); ++i)
        trace += std::to_string(i) + "," + nlohmann::json(b.plsa.loglik_trace[i]).dump() + "\n";
    write_text(out / "loglik_trace.csv", trace);
    write_text(out / "pretest.csv", to_csv(r.pretest, b.category_names));
    spdlog::info("bundle written to {}", (out / "model.bundle").string());
    return kExitOk;
}

int cmd_annotate(const GlobalFlags& g, const std::string& bundle_path, const std::vector<std::string>& inputs) {
    const Config cfg = resolve(g);
    const fs::path out = require_out(g);
    const ModelBundle bundle = load_bundle(bundle_path);
    std::vector<fs::path> images;
    for (const auto& in : inputs)
        for (auto& p : collect_images(in)) images.push_back(std::move(p));
    std::vector<std::size_t> tags(images.size());
    parallel_for(images.size(), cfg.jobs, [&](std::size_t i) {
        const SceneAnnotation a =
            annotate_with_bundle(bundle, read_png_rgb(images[i]), cfg.tau, images[i].filename().string());
        write_annotation(a, bundle, out, images[i].stem().string());
        for (const auto& r : a.regions) tags[i] += r.tag.has_value();
    });
    for (std::size_t i = 0; i < images.size(); ++i)
        spdlog::info("{}: {} tagged regions", images[i].filename().string(), tags[i]);
    spdlog::info("annotated {} images into {}", images.size(), out.string());
    return kExitOk;
}

int cmd_evaluate(const GlobalFlags& g, const std::string& bundle_path, const std::string& manifest_path) {
    const Config cfg = resolve(g);
    const fs::path out = require_out(g);
    const ModelBundle bundle = load_bundle(bundle_path);
    const DatasetManifest m = load_manifest(manifest_path);
    const EvaluationReport r = evaluate_pipeline(bundle, m, cfg);
    write_reports(r, bundle.category_names, out);
    spdlog::info("adaptive {} / ideal {} / O/O {} / O/Z {} of {}{}", r.adaptive.adaptive, r.adaptive.ideal,
                 r.adaptive.fixed_original, r.adaptive.fixed_zero, r.adaptive.total,
                 r.adaptive.exceeds_ideal ? " (adaptive above ideal)" : "");
    spdlog::info("macro P {:.3f} R {:.3f} F {:.3f} over {} regions in {} images", r.prf.mean_precision,
                 r.prf.mean_recall, r.prf.mean_f, r.regions_scored, r.images);
    spdlog::info("segmentation recovery mean {:.3f} min {:.3f}", r.mean_recovery, r.min_recovery);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Region-based total scene annotation"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalFlags g;
    app.add_option("--config", g.config, "JSON configuration file");
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--tau", g.tau, "Annotation threshold");
    app.add_option("--tm", g.tm, "Colour merge threshold");
    app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "Output directory");

    std::string spec = "builtin";
    bool solid = false;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    synth->add_option("spec", spec, "Recipe JSON file or 'builtin'");
    synth->add_flag("--solid", solid, "Plain fills instead of textures");

    std::vector<std::string> seg_inputs;
    auto* seg = app.add_subcommand("segment", "Segment images into region masks");
    seg->add_option("images", seg_inputs, "Images or directories")->required();

    std::string manifest;
    std::string split = "train";
    auto* extract = app.add_subcommand("extract", "Describe ground-truth regions of a split");
    extract->add_option("manifest", manifest, "Dataset manifest")->required();
    extract->add_option("--split", split, "train, pretest or test")->check(CLI::IsMember({"train", "pretest", "test"}));

    auto* train = app.add_subcommand("train", "Train a model bundle");
    train->add_option("manifest", manifest, "Dataset manifest")->required();

    std::string bundle;
    std::vector<std::string> ann_inputs;
    auto* annotate = app.add_subcommand("annotate", "Annotate images with a trained bundle");
    annotate->add_option("bundle", bundle, "Model bundle")->required();
    annotate->add_option("images", ann_inputs, "Images or directories")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a bundle on the test split");
    evaluate->add_option("bundle", bundle, "Model bundle")->required();
    evaluate->add_option("manifest", manifest, "Dataset manifest")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*synth) return cmd_synth(g, spec, solid);
        if (*seg) return cmd_segment(g, seg_inputs);
        if (*extract) return cmd_extract(g, manifest, split);
        if (*train) return cmd_train(g, manifest);
        if (*annotate) return cmd_annotate(g, bundle, ann_inputs);
        if (*evaluate) return cmd_evaluate(g, bundle, manifest);
    } catch (const CLI::RequiredError& e) {
        spdlog::error("{} is required", e.what());
        return kExitUsage;
    } catch (const NumericalError& e) {
        spdlog::error("numerical failure: {}", e.what());
        return kExitNumeric;
    } catch (const DegenerateRegionError& e) {
        spdlog::error("degenerate region {}: {}", e.region_id(), e.what());
        return kExitData;
    } catch (const DataError& e) {
        spdlog::error("{}", e.what());
        return kExitData;
    } catch (const ContractError& e) {
        spdlog::error("{}", e.what());
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        spdlog::error("{}", e.what());
        return kExitData;
    }
    return kExitUsage;
}
