#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include <nlohmann/json.hpp>

#include "scene/corpus.hpp"
#include "scene/descriptor.hpp"
#include "scene/error.hpp"
#include "scene/image_io.hpp"
#include "scene/pipeline.hpp"
#include "scene/segmenter.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace scene;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

RasterImage to_raster(const U8Array& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw ContractError("image must be a (height, width, 3) uint8 array");
    const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
    std::vector<std::uint8_t> px(a.data(), a.data() + a.size());
    return RasterImage(w, h, std::move(px));
}

py::array_t<std::uint8_t> to_array(const RasterImage& img) {
    py::array_t<std::uint8_t> out({img.height(), img.width(), 3});
    std::memcpy(out.mutable_data(), img.bytes().data(), img.bytes().size());
    return out;
}

py::array_t<std::uint32_t> to_array(const RegionMask& mask) {
    py::array_t<std::uint32_t> out({mask.height(), mask.width()});
    std::memcpy(out.mutable_data(), mask.labels().data(), mask.labels().size() * sizeof(std::uint32_t));
    return out;
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

Config make_config(const py::dict& overrides) {
    Config cfg;
    if (!overrides.empty()) apply_json(cfg, from_python(overrides));
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Region-based scene annotation";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("default_config", [] { return to_python(to_json(Config{})); });

    m.def("read_png", [](const fs::path& p) { return to_array(read_png_rgb(p)); }, py::arg("path"));
    m.def("write_png", [](const fs::path& p, const U8Array& a) { write_png_rgb(p, to_raster(a)); }, py::arg("path"),
          py::arg("image"));

    m.def(
        "segment",
        [](const U8Array& image, const py::dict& config) {
            const Config cfg = make_config(config);
            const RasterImage img = to_raster(image);
            RegionMask mask;
            {
                py::gil_scoped_release release;
                mask = segment(img, segmenter_config(cfg));
            }
            return to_array(mask);
        },
        py::arg("image"), py::arg("config") = py::dict(), "Label map (height, width) of segmented regions.");

    m.def(
        "describe",
        [](const U8Array& image) {
            const FeatureVector f = cedd(to_raster(image));
            py::array_t<double> out(static_cast<py::ssize_t>(f.values.size()));
            std::memcpy(out.mutable_data(), f.values.data(), sizeof(f.values));
            return out;
        },
        py::arg("image"), "144-bin colour and edge descriptor of a whole image.");

    m.def(
        "synthesize",
        [](const fs::path& out_dir, const py::object& recipe, bool solid) {
            SceneRecipe r = builtin_recipe();
            if (!recipe.is_none()) {
                try {
                    r = from_python(recipe).get<SceneRecipe>();
                } catch (const nlohmann::json::exception& e) {
                    throw DataError(std::string("scene recipe: ") + e.what());
                }
            }
            SynthOptions opts;
            opts.solid_only = solid;
            return synthesize_dataset(r, out_dir, opts).entries.size();
        },
        py::arg("out_dir"), py::arg("recipe") = py::none(), py::arg("solid") = false,
        "Writes a synthetic dataset from a recipe dict (default: builtin) and returns the image count.");

    py::class_<ModelBundle>(m, "Model")
        .def_static("load", [](const fs::path& p) { return load_bundle(p); }, py::arg("path"))
        .def("save", [](const ModelBundle& b, const fs::path& p) { save_bundle(p, b); }, py::arg("path"))
        .def_property_readonly("categories", [](const ModelBundle& b) { return b.category_names; })
        .def_property_readonly("topics", [](const ModelBundle& b) { return b.plsa.topics; })
        .def_property_readonly("config", [](const ModelBundle& b) { return to_python(to_json(b.config)); })
        .def(
            "annotate",
            [](const ModelBundle& b, const U8Array& image, std::optional<double> tau) {
                const RasterImage img = to_raster(image);
                const double t = tau.value_or(b.config.tau);
                SceneAnnotation a;
                {
                    py::gil_scoped_release release;
                    a = annotate_with_bundle(b, img, t);
                }
                return py::make_tuple(to_python(to_json(a, b.category_names)), to_array(a.overlay),
                                      to_array(a.mask));
            },
            py::arg("image"), py::arg("tau") = py::none(),
            "Returns (annotation dict, overlay image, region label map).");

    m.def(
        "train",
        [](const fs::path& manifest, const py::dict& config) {
            const Config cfg = make_config(config);
            const DatasetManifest man = load_manifest(manifest);
            const std::string hash = dataset_hash(man, manifest.parent_path());
            py::gil_scoped_release release;
            return train_pipeline(man, cfg, hash).bundle;
        },
        py::arg("manifest"), py::arg("config") = py::dict());

    m.def(
        "evaluate",
        [](const ModelBundle& b, const fs::path& manifest, const py::dict& config) {
            const Config cfg = make_config(config);
            const DatasetManifest man = load_manifest(manifest);
            EvaluationReport r;
            {
                py::gil_scoped_release release;
                r = evaluate_pipeline(b, man, cfg);
            }
            const nlohmann::json j = {{"pretest", to_json(r.pretest)},
                                      {"adaptive", to_json(r.adaptive)},
                                      {"prf", to_json(r.prf)},
                                      {"mean_recovery", r.mean_recovery},
                                      {"min_recovery", r.min_recovery},
                                      {"images", r.images},
                                      {"regions_scored", r.regions_scored}};
            return to_python(j);
        },
        py::arg("model"), py::arg("manifest"), py::arg("config") = py::dict());
}
