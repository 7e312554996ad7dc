#include "scene/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "scene/error.hpp"

namespace scene {

std::string_view to_string(Combination c) noexcept {
    switch (c) {
        case Combination::OO: return "O/O";
        case Combination::ZZ: return "Z/Z";
        case Combination::OZ: return "O/Z";
        case Combination::ZO: return "Z/O";
    }
    return "?";
}

PaddingStrategy train_side(Combination c) noexcept {
    return c == Combination::OO || c == Combination::OZ ? PaddingStrategy::PadOriginal : PaddingStrategy::PadZero;
}

PaddingStrategy test_side(Combination c) noexcept {
    return c == Combination::OO || c == Combination::ZO ? PaddingStrategy::PadOriginal : PaddingStrategy::PadZero;
}

PaddingStrategy choose_strategy(const CategoryCounts& counts) noexcept {
    return counts[Combination::OZ] > counts[Combination::OO] ? PaddingStrategy::PadZero
                                                             : PaddingStrategy::PadOriginal;
}

Combination best_combination(const CategoryCounts& counts) noexcept {
    constexpr std::array<Combination, 4> preference = {Combination::OO, Combination::OZ, Combination::ZO,
                                                       Combination::ZZ};
    Combination best = preference[0];
    for (auto c : preference)
        if (counts[c] > counts[best]) best = c;
    return best;
}

PaddingStrategy StrategyMap::at(int category) const {
    auto it = choice.find(category);
    if (it == choice.end())
        throw ContractError("strategy map has no entry for category " + std::to_string(category));
    return it->second;
}

StrategyMap build_strategy_map(std::vector<CategoryCounts> counts) {
    StrategyMap map;
    std::sort(counts.begin(), counts.end(),
              [](const CategoryCounts& a, const CategoryCounts& b) { return a.category < b.category; });
    for (const auto& row : counts) {
        if (row.train == 0 && row.test > 0) {
            map.unmappable.push_back(row.category);
            continue;
        }
        map.choice[row.category] = choose_strategy(row);
    }
    map.provenance = std::move(counts);
    return map;
}

void LabeledFeatures::validate() const {
    if (pad_original.size() != categories.size() || pad_zero.size() != categories.size())
        throw ContractError("LabeledFeatures: feature and category counts differ");
    if (!region_ids.empty() && region_ids.size() != categories.size())
        throw ContractError("LabeledFeatures: region id count differs");
}

int predicted_category(const std::vector<int>& ranking, std::span<const int> topic_category) noexcept {
    if (ranking.empty()) return -1;
    const auto top = static_cast<std::size_t>(ranking.front());
    return top < topic_category.size() ? topic_category[top] : -1;
}

std::vector<PretestRecord> score_combinations(const PlsaModel& model_original, std::span<const int> topics_original,
                                              const PlsaModel& model_zero, std::span<const int> topics_zero,
                                              const LabeledFeatures& regions, const FoldInOptions& fold) {
    regions.validate();
    std::vector<PretestRecord> records(regions.size());
    for (std::size_t i = 0; i < regions.size(); ++i) {
        PretestRecord& rec = records[i];
        rec.region_id = regions.region_ids.empty() ? static_cast<long>(i) : regions.region_ids[i];
        rec.category = regions.categories[i];
        for (auto combo : kCombinations) {
            const bool o_model = train_side(combo) == PaddingStrategy::PadOriginal;
            const PlsaModel& model = o_model ? model_original : model_zero;
            const auto topic_map = o_model ? topics_original : topics_zero;
            FoldInResult fr = fold_in(model, regions.under(test_side(combo))[i], fold);
            RankingOutcome& o = rec.outcome[static_cast<std::size_t>(combo)];
            o.predicted = predicted_category(fr.ranking, topic_map);
            o.posterior = std::move(fr.posterior);
            o.ranking = std::move(fr.ranking);
        }
    }
    return records;
}

std::vector<CategoryCounts> tabulate(std::span<const int> train_categories, const std::vector<PretestRecord>& records,
                                     int num_categories) {
    std::vector<CategoryCounts> counts(static_cast<std::size_t>(num_categories));
    std::set<int> seen;
    for (int c = 0; c < num_categories; ++c) counts[static_cast<std::size_t>(c)].category = c;
    auto row_of = [&](int c) -> CategoryCounts& {
        if (c < 0 || c >= num_categories) throw ContractError("tabulate: category out of range");
        seen.insert(c);
        return counts[static_cast<std::size_t>(c)];
    };
    for (int c : train_categories) ++row_of(c).train;
    for (const auto& rec : records) {
        auto& row = row_of(rec.category);
        ++row.test;
        for (auto combo : kCombinations)
            if (rec.correct(combo)) ++row.correct[static_cast<std::size_t>(combo)];
    }
    std::vector<CategoryCounts> present;
    for (auto& row : counts)
        if (seen.count(row.category)) present.push_back(row);
    return present;
}

PretestResult pretest(const LabeledFeatures& train, const LabeledFeatures& heldout, int num_categories,
                      const PretestOptions& options) {
    train.validate();
    heldout.validate();
    if (train.size() == 0) throw ContractError("pretest: empty training set");
    for (int c : train.categories)
        if (c < 0 || c >= num_categories) throw ContractError("pretest: training category out of range");
    for (int c : heldout.categories)
        if (c < 0 || c >= num_categories) throw ContractError("pretest: held-out category out of range");

    auto ids_or_positions = [](const LabeledFeatures& lf) {
        if (!lf.region_ids.empty()) return lf.region_ids;
        std::vector<long> ids(lf.size());
        std::iota(ids.begin(), ids.end(), 0L);
        return ids;
    };

    PretestResult out;
    const auto train_ids = ids_or_positions(train);
    out.model_original = scene::train(build_term_matrix(train.pad_original, options.term_scale, train_ids), options.plsa);
    out.model_zero = scene::train(build_term_matrix(train.pad_zero, options.term_scale, train_ids), options.plsa);
    out.topic_category_original = map_topics_by_vote(out.model_original, train.categories, num_categories);
    out.topic_category_zero = map_topics_by_vote(out.model_zero, train.categories, num_categories);

    out.records = score_combinations(out.model_original, out.topic_category_original, out.model_zero,
                                     out.topic_category_zero, heldout, options.fold);
    out.strategy_map = build_strategy_map(tabulate(train.categories, out.records, num_categories));
    return out;
}

double PaddingClassifier::decision_value(std::span<const double> feature) const {
    if (feature.size() != static_cast<std::size_t>(kFeatureLength))
        throw ContractError("padding classifier: feature length " + std::to_string(feature.size()) + " != 144");
    double v = bias;
    for (std::size_t d = 0; d < weights.size(); ++d) v += weights[d] * ((feature[d] - mean[d]) / scale[d]);
    return v;
}

PaddingStrategy select_strategy(const PaddingClassifier& classifier, std::span<const double> feature) {
    return classifier.decision_value(feature) > 0.0 ? PaddingStrategy::PadZero : PaddingStrategy::PadOriginal;
}

PaddingStrategy select_strategy(const PaddingClassifier& classifier, const FeatureVector& feature) {
    return select_strategy(classifier, feature.span());
}

PaddingClassifier train_padding_classifier(std::span<const FeatureVector> features, std::span<const int> categories,
                                           const StrategyMap& strategy_map, const ClassifierOptions& opt) {
    if (features.size() != categories.size())
        throw ContractError("train_padding_classifier: feature and category counts differ");
    if (features.empty()) throw ContractError("train_padding_classifier: no training regions");
    if (!(opt.reg > 0.0) || opt.epochs < 1)
        throw ContractError("train_padding_classifier: reg must be > 0 and epochs >= 1");

    const std::size_t n = features.size();
    constexpr std::size_t D = kFeatureLength;
    std::vector<double> labels(n);
    for (std::size_t i = 0; i < n; ++i)
        labels[i] = strategy_map.at(categories[i]) == PaddingStrategy::PadZero ? 1.0 : -1.0;

    PaddingClassifier clf;
    clf.reg = opt.reg;
    clf.epochs = opt.epochs;
    clf.seed = opt.seed;

    for (std::size_t d = 0; d < D; ++d) {
        double s = 0.0;
        for (const auto& f : features) s += f[d];
        clf.mean[d] = s / static_cast<double>(n);
        double v = 0.0;
        for (const auto& f : features) v += (f[d] - clf.mean[d]) * (f[d] - clf.mean[d]);
        const double sd = std::sqrt(v / static_cast<double>(n));
        clf.scale[d] = sd > 1e-12 ? sd : 1.0;
    }

    const bool all_same = std::all_of(labels.begin(), labels.end(), [&](double y) { return y == labels[0]; });
    if (all_same) {
        clf.degenerate = true;
        clf.bias = labels[0];
        clf.training_accuracy = 1.0;
        return clf;
    }

    std::vector<std::array<double, D>> x(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < D; ++d) x[i][d] = (features[i][d] - clf.mean[d]) / clf.scale[d];

    // Pegasos-style subgradient descent on the regularized hinge loss; the bias
    // rides along as a constant feature. Visit order is a seeded Fisher-Yates
    // shuffle per epoch.
    std::array<double, D> w{};
    double b = 0.0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(opt.seed);
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
        for (std::size_t idx : order) {
            ++t;
            const double eta = 1.0 / (opt.reg * static_cast<double>(t));
            double margin = b;
            for (std::size_t d = 0; d < D; ++d) margin += w[d] * x[idx][d];
            margin *= labels[idx];
            const double shrink = 1.0 - eta * opt.reg;
            for (auto& wd : w) wd *= shrink;
            b *= shrink;
            if (margin < 1.0) {
                for (std::size_t d = 0; d < D; ++d) w[d] += eta * labels[idx] * x[idx][d];
                b += eta * labels[idx];
            }
        }
    }
    clf.weights = w;
    clf.bias = b;

    std::size_t agree = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool zero = select_strategy(clf, features[i]) == PaddingStrategy::PadZero;
        agree += zero == (labels[i] > 0.0);
    }
    clf.training_accuracy = static_cast<double>(agree) / static_cast<double>(n);
    return clf;
}

}  // namespace scene
