#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scene/adaptive.hpp"

namespace scene {

/// C x C counts, rows = truth, columns = prediction.
struct ConfusionTable {
    int categories = 0;
    std::vector<long> counts;
    long correct = 0;
    long total = 0;

    long at(int truth, int predicted) const;
    long row_total(int truth) const;
    /// 100 * count / row total at full precision; 0 for an empty row.
    double row_percent(int truth, int predicted) const;
    /// Row percentage rounded half-up to an integer.
    int row_percent_rounded(int truth, int predicted) const;
    double accuracy() const noexcept { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

/// Throws ContractError on an id outside [0, C).
ConfusionTable confusion(std::span<const std::pair<int, int>> pairs, int num_categories);

/// Pre-test ranking table with its TOTAL row and the per-category choice.
struct PretestTable {
    std::vector<CategoryCounts> rows;
    std::vector<PaddingStrategy> chosen;  // per row, O/Z only when strictly better than O/O
    long train_total = 0;
    long test_total = 0;
    std::array<long, 4> totals{};  // indexed by Combination
    long ideal_total = 0;          // sum over rows of the chosen combination's count

    long total(Combination c) const noexcept { return totals[static_cast<std::size_t>(c)]; }
};

PretestTable pretest_table(std::vector<CategoryCounts> rows);

struct PrfRow {
    int category = 0;
    long tp = 0;
    long fp = 0;
    long fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
    bool excluded = false;  // never predicted and never true
};

struct PrfReport {
    std::vector<PrfRow> rows;
    double mean_precision = 0.0;  // unweighted over non-excluded rows
    double mean_recall = 0.0;
    double mean_f = 0.0;
    std::vector<int> excluded;
};

/// 2PR / (P + R), 0 when P + R = 0.
double f_measure(double precision, double recall) noexcept;

/// Per-region (truth, tag). A missing tag is a false negative for the truth category.
PrfReport prf(std::span<const std::pair<int, std::optional<int>>> predictions, int num_categories);

struct AdaptiveRow {
    int category = 0;
    long test = 0;
    long ideal = 0;
    long adaptive = 0;
    long fixed_original = 0;  // O/O
    long fixed_zero = 0;      // O/Z
};

/// Correct counts under the pad-O-trained model with different test-side paddings.
struct AdaptiveComparison {
    long total = 0;
    long ideal = 0;            // each category's strategy-map choice
    long adaptive = 0;         // the classifier's per-region choice
    long fixed_original = 0;   // O/O everywhere
    long fixed_zero = 0;       // O/Z everywhere
    long decisions_matching_map = 0;
    bool exceeds_ideal = false;  // region-level choices can beat the per-category oracle
    std::vector<AdaptiveRow> rows;

    long best_fixed() const noexcept { return std::max(fixed_original, fixed_zero); }
};

/// Categories without a strategy-map entry count as pad-O in the ideal column.
AdaptiveComparison compare_adaptive(const std::vector<PretestRecord>& records, const StrategyMap& strategy_map,
                                    std::span<const PaddingStrategy> decisions);

/// Pixel agreement between a reference partition and a predicted one: the
/// smaller of the two majority-overlap fractions (each predicted region mapped
/// to its dominant reference region, and vice versa). 1 for identical partitions.
double region_recovery(const RegionMask& reference, const RegionMask& predicted);

/// Dominant reference category of every predicted region (pixel vote, ties to the lower id).
std::vector<int> majority_categories(const RegionMask& reference, std::span<const int> reference_categories,
                                     const RegionMask& predicted);

std::string category_label(int category, std::span<const std::string> names);

// CSV exports. Column orders:
//   pre-test:   category,train,test,O/O,Z/Z,O/Z,Z/O,chosen  (+ TOTAL and IDEAL rows)
//   confusion:  truth,<one column per predicted category>,row_total  (integer row percentages,
//               or raw counts), then a "Total: correct/total" line
//   adaptive:   strategy,correct,total
//   prf:        category,precision,recall,f  (+ Mean row)
std::string to_csv(const PretestTable& table, std::span<const std::string> names = {});
std::string to_csv(const ConfusionTable& table, std::span<const std::string> names = {}, bool percent = true);
std::string to_csv(const AdaptiveComparison& cmp);
std::string to_csv(const PrfReport& report, std::span<const std::string> names = {});

nlohmann::json to_json(const PretestTable& table);
nlohmann::json to_json(const ConfusionTable& table);
nlohmann::json to_json(const AdaptiveComparison& cmp);
nlohmann::json to_json(const PrfReport& report);

}  // namespace scene
