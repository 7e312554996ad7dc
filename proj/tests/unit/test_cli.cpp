#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "scene/image_io.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string("\"") + SCENE_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

const fs::path& workspace() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "scene_unit" / "cli";
        fs::remove_all(d);
        fs::create_directories(d);
        const nlohmann::json recipe = {
            {"width", 64},
            {"height", 64},
            {"seed", 3},
            {"categories",
             {{{"name", "ground"}, {"fill", {{"kind", "solid"}, {"primary", {30, 60, 200}}}}},
              {{"name", "sun"}, {"fill", {{"kind", "solid"}, {"primary", {230, 210, 40}}}}}}},
            {"scenes",
             {{{"name", "sky"},
               {"background", 0},
               {"objects", {{{"category", 1}, {"min_size", 0.35}, {"max_size", 0.55}}}},
               {"train", 6},
               {"pretest", 3},
               {"test", 4}}}}};
        std::ofstream(d / "recipe.json") << recipe.dump();
        REQUIRE(run("synth " + q(d / "recipe.json") + " --out " + q(d / "data")) == 0);
        REQUIRE(run("train " + q(d / "data" / "manifest.jsonl") + " --out " + q(d / "model")) == 0);
        return d;
    }();
    return dir;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(std::ifstream(p)); }

}  // namespace

TEST_CASE("cli exit codes") {
    const fs::path& d = workspace();
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("train " + q(d / "data" / "manifest.jsonl")) == 2);  // no --out
    CHECK(run("train " + q(d / "absent.jsonl") + " --out " + q(d / "x")) == 3);
    CHECK(run("annotate " + q(d / "absent.bundle") + " " + q(d / "data" / "images") + " --out " + q(d / "x")) == 3);
    CHECK(run("train " + q(d / "data" / "manifest.jsonl") + " --jobs 0 --out " + q(d / "x")) == 2);
    std::ofstream(d / "bad.json") << R"({"not_a_key": 1})";
    CHECK(run("--config " + q(d / "bad.json") + " train " + q(d / "data" / "manifest.jsonl") + " --out " +
              q(d / "x")) == 3);
}

TEST_CASE("cli annotate") {
    const fs::path& d = workspace();
    const fs::path bundle = d / "model" / "model.bundle";
    REQUIRE(fs::exists(bundle));
    REQUIRE(fs::exists(d / "model" / "pretest.csv"));
    REQUIRE(fs::exists(d / "model" / "loglik_trace.csv"));

    fs::path image;
    for (const auto& e : fs::directory_iterator(d / "data" / "images"))
        if (e.path().filename().string().find("test") != std::string::npos) image = e.path();
    REQUIRE(!image.empty());
    const std::string stem = image.stem().string();

    REQUIRE(run("annotate " + q(bundle) + " " + q(image) + " --tau 0 --out " + q(d / "low")) == 0);
    REQUIRE(run("annotate " + q(bundle) + " " + q(image) + " --tau 1.1 --out " + q(d / "high")) == 0);
    CHECK(std::distance(fs::directory_iterator(d / "low"), fs::directory_iterator{}) == 2);
    const auto png = scene::read_png_rgb(d / "low" / (stem + ".annotated.png"));
    CHECK(png.width() == 64);

    // The threshold only changes which topics become tags.
    const auto low = read_json(d / "low" / (stem + ".json"));
    const auto high = read_json(d / "high" / (stem + ".json"));
    REQUIRE(low["regions"].size() == high["regions"].size());
    bool any_tag_low = false, any_tag_high = false;
    for (std::size_t i = 0; i < low["regions"].size(); ++i) {
        CHECK(low["regions"][i]["ranking"] == high["regions"][i]["ranking"]);
        any_tag_low |= !low["regions"][i]["tag"].is_null();
        any_tag_high |= !high["regions"][i]["tag"].is_null();
    }
    CHECK(any_tag_low);
    CHECK_FALSE(any_tag_high);

    // A directory yields one overlay and one JSON per image.
    REQUIRE(run("annotate " + q(bundle) + " " + q(d / "data" / "images") + " --out " + q(d / "all")) == 0);
    const auto inputs = std::distance(fs::directory_iterator(d / "data" / "images"), fs::directory_iterator{});
    CHECK(std::distance(fs::directory_iterator(d / "all"), fs::directory_iterator{}) == 2 * inputs);
}

TEST_CASE("cli evaluate and segment") {
    const fs::path& d = workspace();
    REQUIRE(run("evaluate " + q(d / "model" / "model.bundle") + " " + q(d / "data" / "manifest.jsonl") + " --out " +
                q(d / "eval")) == 0);
    const auto report = read_json(d / "eval" / "report.json");
    CHECK(report["images"] == 4);
    CHECK(report["prf"]["mean_f"].get<double>() == doctest::Approx(1.0));
    REQUIRE(run("segment " + q(d / "data" / "images") + " --out " + q(d / "seg")) == 0);
    CHECK(!fs::is_empty(d / "seg"));
    REQUIRE(run("extract " + q(d / "data" / "manifest.jsonl") + " --split test --out " + q(d / "feat")) == 0);
    CHECK(!fs::is_empty(d / "feat"));
}
