#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scene/descriptor.hpp"
#include "scene/padding.hpp"
#include "scene/plsa.hpp"

namespace scene {

/// Train-side / test-side padding pair, in pre-test table column order.
enum class Combination : int { OO = 0, ZZ = 1, OZ = 2, ZO = 3 };
inline constexpr std::array<Combination, 4> kCombinations = {Combination::OO, Combination::ZZ, Combination::OZ,
                                                             Combination::ZO};

std::string_view to_string(Combination c) noexcept;
PaddingStrategy train_side(Combination c) noexcept;
PaddingStrategy test_side(Combination c) noexcept;

/// One row of the pre-test table.
struct CategoryCounts {
    int category = 0;
    int train = 0;
    int test = 0;
    std::array<int, 4> correct{};  // indexed by Combination

    int operator[](Combination c) const noexcept { return correct[static_cast<std::size_t>(c)]; }
};

/// Strategy among the pad-O-trained combinations: O/Z only if strictly better than O/O.
PaddingStrategy choose_strategy(const CategoryCounts& counts) noexcept;

/// Best of all four combinations. Ties prefer pad-O training, then O/O over O/Z, then Z/O over Z/Z.
Combination best_combination(const CategoryCounts& counts) noexcept;

struct StrategyMap {
    std::map<int, PaddingStrategy> choice;  // category -> test-side padding
    std::vector<CategoryCounts> provenance;
    std::vector<int> unmappable;  // held-out categories absent from training

    bool contains(int category) const { return choice.count(category) != 0; }
    PaddingStrategy at(int category) const;
};

StrategyMap build_strategy_map(std::vector<CategoryCounts> counts);

/// Features of the same regions under both paddings.
struct LabeledFeatures {
    std::vector<FeatureVector> pad_original;
    std::vector<FeatureVector> pad_zero;
    std::vector<int> categories;
    std::vector<long> region_ids;

    std::size_t size() const noexcept { return categories.size(); }
    const std::vector<FeatureVector>& under(PaddingStrategy s) const noexcept {
        return s == PaddingStrategy::PadZero ? pad_zero : pad_original;
    }
    void validate() const;
};

/// A region's outcome under one combination.
struct RankingOutcome {
    std::vector<double> posterior;  // per topic
    std::vector<int> ranking;       // topics, best first
    int predicted = -1;             // category of the top topic, -1 if unmapped
};

struct PretestRecord {
    long region_id = 0;
    int category = 0;
    std::array<RankingOutcome, 4> outcome;  // indexed by Combination

    bool correct(Combination c) const noexcept {
        return outcome[static_cast<std::size_t>(c)].predicted == category;
    }
};

struct PretestOptions {
    TrainOptions plsa;
    FoldInOptions fold;
    double term_scale = 100.0;
};

struct PretestResult {
    PlsaModel model_original;  // pLSA-O
    PlsaModel model_zero;      // pLSA-Z
    std::vector<int> topic_category_original;
    std::vector<int> topic_category_zero;
    std::vector<PretestRecord> records;
    StrategyMap strategy_map;
};

/// Trains pLSA-O and pLSA-Z on `train`, folds every held-out region in under all
/// four combinations and picks each category's test-side padding.
PretestResult pretest(const LabeledFeatures& train, const LabeledFeatures& heldout, int num_categories,
                      const PretestOptions& options);

/// Folds every region in under all four combinations.
std::vector<PretestRecord> score_combinations(const PlsaModel& model_original, std::span<const int> topics_original,
                                              const PlsaModel& model_zero, std::span<const int> topics_zero,
                                              const LabeledFeatures& regions, const FoldInOptions& fold);

/// Pre-test table rows for every category seen in training or in the records.
std::vector<CategoryCounts> tabulate(std::span<const int> train_categories, const std::vector<PretestRecord>& records,
                                     int num_categories);

/// Category of the top-ranked topic for a fold-in ranking.
int predicted_category(const std::vector<int>& ranking, std::span<const int> topic_category) noexcept;

struct ClassifierOptions {
    double reg = 1e-3;
    int epochs = 200;
    std::uint64_t seed = 0;
};

/// Linear max-margin PadZero (+1) / PadOriginal (-1) predictor over standardized features.
struct PaddingClassifier {
    std::array<double, kFeatureLength> weights{};
    double bias = 0.0;
    std::array<double, kFeatureLength> mean{};
    std::array<double, kFeatureLength> scale{};
    double reg = 1e-3;
    int epochs = 0;
    std::uint64_t seed = 0;
    bool degenerate = false;
    double training_accuracy = 0.0;

    PaddingClassifier() { scale.fill(1.0); }
    double decision_value(std::span<const double> feature) const;
};

/// Labels come from the strategy map; every category must have an entry.
PaddingClassifier train_padding_classifier(std::span<const FeatureVector> features, std::span<const int> categories,
                                           const StrategyMap& strategy_map, const ClassifierOptions& options);

/// sign(w.x + b): positive -> PadZero, otherwise PadOriginal. Throws on wrong length.
PaddingStrategy select_strategy(const PaddingClassifier& classifier, std::span<const double> feature);
PaddingStrategy select_strategy(const PaddingClassifier& classifier, const FeatureVector& feature);

}  // namespace scene
