#include "scene/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "scene/error.hpp"

namespace scene {

namespace {

template <typename T>
std::function<void(Config&, const nlohmann::json&)> field(T Config::*member) {
    return [member](Config& cfg, const nlohmann::json& v) { cfg.*member = v.get<T>(); };
}

const std::map<std::string, std::function<void(Config&, const nlohmann::json&)>>& setters() {
    static const std::map<std::string, std::function<void(Config&, const nlohmann::json&)>> table = {
        {"tm", field(&Config::tm)},
        {"window_sizes", field(&Config::window_sizes)},
        {"j_threshold_stddevs", field(&Config::j_threshold_stddevs)},
        {"min_region_px", field(&Config::min_region_px)},
        {"block_size", field(&Config::block_size)},
        {"edge_threshold", field(&Config::edge_threshold)},
        {"tau", field(&Config::tau)},
        {"min_area_fraction", field(&Config::min_area_fraction)},
        {"topics", field(&Config::topics)},
        {"max_iters", field(&Config::max_iters)},
        {"tol", field(&Config::tol)},
        {"restarts", field(&Config::restarts)},
        {"seed", field(&Config::seed)},
        {"term_scale", field(&Config::term_scale)},
        {"fold_iters", field(&Config::fold_iters)},
        {"fold_tol", field(&Config::fold_tol)},
        {"classifier_reg", field(&Config::classifier_reg)},
        {"classifier_epochs", field(&Config::classifier_epochs)},
        {"jobs", field(&Config::jobs)},
    };
    return table;
}

}  // namespace

void Config::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ContractError(std::string("config: ") + what);
    };
    require(tm > 0.0, "tm must be > 0");
    require(!window_sizes.empty(), "window_sizes must not be empty");
    for (int w : window_sizes) require(w >= 3 && w % 2 == 1, "window sizes must be odd and >= 3");
    require(min_region_px >= 1, "min_region_px must be >= 1");
    require(block_size >= 2 && block_size % 2 == 0, "block_size must be even and >= 2");
    require(edge_threshold >= 0.0, "edge_threshold must be >= 0");
    require(tau >= 0.0, "tau must be >= 0");
    require(min_area_fraction >= 0.0 && min_area_fraction < 1.0, "min_area_fraction must be in [0, 1)");
    require(topics >= 0, "topics must be >= 0");
    require(max_iters >= 1, "max_iters must be >= 1");
    require(tol >= 0.0, "tol must be >= 0");
    require(restarts >= 1, "restarts must be >= 1");
    require(term_scale > 0.0, "term_scale must be > 0");
    require(fold_iters >= 1, "fold_iters must be >= 1");
    require(fold_tol >= 0.0, "fold_tol must be >= 0");
    require(classifier_reg > 0.0, "classifier_reg must be > 0");
    require(classifier_epochs >= 1, "classifier_epochs must be >= 1");
    require(jobs >= 1, "jobs must be >= 1");
}

void apply_json(Config& cfg, const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("config: top level must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        auto it = setters().find(key);
        if (it == setters().end()) throw DataError("config: unknown key '" + key + "'");
        try {
            it->second(cfg, value);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("config: bad value for '" + key + "': " + e.what());
        }
    }
}

Config load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("config: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("config: " + path.string() + ": " + e.what());
    }
    Config cfg;
    apply_json(cfg, j);
    cfg.validate();
    return cfg;
}

Config resolve_config(const std::optional<std::filesystem::path>& file, const ConfigOverrides& cli) {
    Config cfg = file ? load_config_file(*file) : Config{};
    if (cli.seed) cfg.seed = *cli.seed;
    if (cli.tau) cfg.tau = *cli.tau;
    if (cli.tm) cfg.tm = *cli.tm;
    if (cli.jobs) cfg.jobs = *cli.jobs;
    cfg.validate();
    return cfg;
}

nlohmann::json to_json(const Config& c) {
    return {{"tm", c.tm},
            {"window_sizes", c.window_sizes},
            {"j_threshold_stddevs", c.j_threshold_stddevs},
            {"min_region_px", c.min_region_px},
            {"block_size", c.block_size},
            {"edge_threshold", c.edge_threshold},
            {"tau", c.tau},
            {"min_area_fraction", c.min_area_fraction},
            {"topics", c.topics},
            {"max_iters", c.max_iters},
            {"tol", c.tol},
            {"restarts", c.restarts},
            {"seed", c.seed},
            {"term_scale", c.term_scale},
            {"fold_iters", c.fold_iters},
            {"fold_tol", c.fold_tol},
            {"classifier_reg", c.classifier_reg},
            {"classifier_epochs", c.classifier_epochs},
            {"jobs", c.jobs}};
}

SegmenterConfig segmenter_config(const Config& c) {
    SegmenterConfig s;
    s.tm = c.tm;
    s.window_sizes = c.window_sizes;
    s.j_threshold_stddevs = c.j_threshold_stddevs;
    s.min_region_px = c.min_region_px;
    return s;
}

DescriptorConfig descriptor_config(const Config& c) {
    DescriptorConfig d;
    d.block_size = c.block_size;
    d.edge_threshold = c.edge_threshold;
    return d;
}

FoldInOptions fold_options(const Config& c) { return {c.fold_iters, c.fold_tol}; }

AnnotatorConfig annotator_config(const Config& c) {
    AnnotatorConfig a;
    a.segmenter = segmenter_config(c);
    a.descriptor = descriptor_config(c);
    a.fold = fold_options(c);
    a.min_area_fraction = c.min_area_fraction;
    a.tau = c.tau;
    return a;
}

TrainOptions train_options(const Config& c, int num_categories) {
    TrainOptions t;
    t.topics = c.topics > 0 ? c.topics : num_categories;
    t.max_iters = c.max_iters;
    t.tol = c.tol;
    t.seed = c.seed;
    t.restarts = c.restarts;
    return t;
}

}  // namespace scene
