#include <doctest.h>

#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "reference_tables.hpp"
#include "scene/error.hpp"
#include "scene/eval.hpp"

using namespace scene;

TEST_CASE("confusion tables") {
    SUBCASE("perfect predictions") {
        std::vector<std::pair<int, int>> pairs = {{0, 0}, {1, 1}, {2, 2}, {1, 1}};
        const auto t = confusion(pairs, 3);
        CHECK(t.correct == t.total);
        CHECK(t.at(1, 1) == 2);
        CHECK(t.at(0, 1) == 0);
        CHECK(t.accuracy() == 1.0);
    }
    SUBCASE("random instances against a tally") {
        std::mt19937 rng(4);
        for (int trial = 0; trial < 20; ++trial) {
            const int C = 2 + static_cast<int>(rng() % 5);
            std::vector<std::pair<int, int>> pairs(60);
            std::vector<std::vector<long>> tally(static_cast<std::size_t>(C), std::vector<long>(static_cast<std::size_t>(C), 0));
            long diag = 0;
            for (auto& p : pairs) {
                p = {static_cast<int>(rng() % C), static_cast<int>(rng() % C)};
                ++tally[static_cast<std::size_t>(p.first)][static_cast<std::size_t>(p.second)];
                diag += p.first == p.second;
            }
            const auto t = confusion(pairs, C);
            for (int a = 0; a < C; ++a)
                for (int b = 0; b < C; ++b) CHECK(t.at(a, b) == tally[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
            CHECK(t.correct == diag);
            CHECK(t.total == 60);
        }
    }
    SUBCASE("row percentages") {
        std::vector<std::pair<int, int>> pairs = {{0, 0}, {0, 0}, {0, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 0}};
        const auto t = confusion(pairs, 2);
        CHECK(t.row_percent(0, 0) == doctest::Approx(200.0 / 3.0));
        CHECK(t.row_percent_rounded(0, 0) == 67);
        CHECK(t.row_percent_rounded(1, 0) == 20);
        CHECK(t.row_percent_rounded(1, 1) == 80);
        const std::string csv = to_csv(t, std::vector<std::string>{"a", "b"});
        CHECK(csv.find("Total: 6/8") != std::string::npos);
    }
    CHECK_THROWS_AS(confusion(std::vector<std::pair<int, int>>{{0, 3}}, 2), ContractError);
}

TEST_CASE("reference correct counts reproduce the confusion totals") {
    // Diagonal-only tables carry the per-category corrects; totals match O/O and O/Z.
    for (auto c : {Combination::OO, Combination::OZ}) {
        std::vector<std::pair<int, int>> pairs;
        for (const auto& row : reference::pretest_rows()) {
            for (int i = 0; i < row.test; ++i)
                pairs.emplace_back(row.category, i < row[c] ? row.category : (row.category + 1) % 8);
        }
        const auto t = confusion(pairs, 8);
        CHECK(t.total == reference::kPretestRegions);
        CHECK(t.correct == reference::kPretestTotals[static_cast<std::size_t>(c)]);
    }
}

TEST_CASE("F measure") {
    CHECK(f_measure(0.97, 0.72) == doctest::Approx(2 * 0.97 * 0.72 / 1.69));
    CHECK(std::abs(f_measure(0.97, 0.72) - 0.83) <= 0.005);
    CHECK(f_measure(0, 0) == 0.0);
    for (const auto& r : reference::prf_rows()) CHECK(std::abs(f_measure(r.precision, r.recall) - r.f) <= 0.005);
}

TEST_CASE("precision and recall") {
    SUBCASE("all correct") {
        std::vector<std::pair<int, std::optional<int>>> p = {{0, 0}, {1, 1}, {2, 2}};
        const auto r = prf(p, 3);
        for (const auto& row : r.rows) {
            CHECK(row.precision == 1.0);
            CHECK(row.recall == 1.0);
            CHECK(row.f == 1.0);
        }
        CHECK(r.mean_f == 1.0);
    }
    SUBCASE("ten regions against a brute-force counter") {
        const std::vector<std::pair<int, std::optional<int>>> p = {
            {0, 0}, {0, 1}, {0, std::nullopt}, {1, 1}, {1, 1}, {1, 2}, {2, 2}, {2, 0}, {3, std::nullopt}, {0, 0}};
        const auto r = prf(p, 5);
        for (int c = 0; c < 5; ++c) {
            long tp = 0, fp = 0, fn = 0;
            for (const auto& [truth, tag] : p) {
                if (tag && *tag == c && truth == c) ++tp;
                if (tag && *tag == c && truth != c) ++fp;
                if (truth == c && !(tag && *tag == c)) ++fn;
            }
            const auto& row = r.rows[static_cast<std::size_t>(c)];
            CHECK(row.tp == tp);
            CHECK(row.fp == fp);
            CHECK(row.fn == fn);
            if (tp + fp) CHECK(row.precision == doctest::Approx(double(tp) / double(tp + fp)));
            if (tp + fn) CHECK(row.recall == doctest::Approx(double(tp) / double(tp + fn)));
        }
        CHECK(r.rows[4].excluded);
        CHECK(r.excluded == std::vector<int>{4});
        double mean = 0;
        for (int c = 0; c < 4; ++c) mean += r.rows[static_cast<std::size_t>(c)].f;
        CHECK(r.mean_f == doctest::Approx(mean / 4));
    }
}

TEST_CASE("region recovery and majority categories") {
    const RegionMask truth(4, 2, {0, 0, 1, 1, 0, 0, 1, 1});
    CHECK(region_recovery(truth, truth) == 1.0);
    const RegionMask shifted(4, 2, {0, 0, 0, 1, 0, 0, 0, 1});
    // shifted->truth: 6 of 8 pixels agree; truth->shifted: 6 of 8 as well.
    CHECK(region_recovery(truth, shifted) == doctest::Approx(0.75));
    const RegionMask merged(4, 2, std::vector<std::uint32_t>(8, 0));
    CHECK(region_recovery(truth, merged) == doctest::Approx(0.5));
    CHECK(majority_categories(truth, std::vector<int>{5, 7}, shifted) == std::vector<int>{5, 7});
    CHECK(majority_categories(truth, std::vector<int>{5, 7}, merged) == std::vector<int>{5});
}

TEST_CASE("exports") {
    const PretestTable t = pretest_table(reference::pretest_rows());
    const std::vector<std::string> names(reference::kCategoryNames.begin(), reference::kCategoryNames.end());
    const std::string csv = to_csv(t, names);
    CHECK(csv.rfind("category,train,test,O/O,Z/Z,O/Z,Z/O,chosen\n", 0) == 0);
    CHECK(csv.find("Butterfly,101,25,9,7,12,7,O/Z") != std::string::npos);
    CHECK(csv.find("TOTAL,1324,331,188,161,106,174") != std::string::npos);
    CHECK(csv.find("IDEAL") != std::string::npos);
    const auto j = to_json(t);
    CHECK(j.at("ideal_total") == 203);

    std::vector<std::pair<int, std::optional<int>>> p = {{0, 0}, {1, 0}};
    const std::string prf_csv = to_csv(prf(p, 2));
    CHECK(prf_csv.find("Mean") != std::string::npos);
}
