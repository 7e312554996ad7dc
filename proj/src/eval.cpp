#include "scene/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scene/error.hpp"

namespace scene {

namespace {

void check_category(int c, int num_categories, const char* where) {
    if (c < 0 || c >= num_categories)
        throw ContractError(std::string(where) + ": category " + std::to_string(c) + " outside [0, " +
                            std::to_string(num_categories) + ")");
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

double ratio(long num, long den) noexcept {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

// Fraction of pixels whose `b` label is the majority `b` label within their `a` region.
double majority_overlap(const RegionMask& a, const RegionMask& b) {
    std::vector<std::map<std::uint32_t, long>> votes(a.region_count());
    for (std::size_t i = 0; i < a.labels().size(); ++i) ++votes[a.labels()[i]][b.labels()[i]];
    long agree = 0;
    for (const auto& v : votes) {
        long best = 0;
        for (const auto& [label, n] : v) best = std::max(best, n);
        agree += best;
    }
    return a.labels().empty() ? 1.0 : static_cast<double>(agree) / static_cast<double>(a.labels().size());
}

}  // namespace

double region_recovery(const RegionMask& reference, const RegionMask& predicted) {
    if (reference.width() != predicted.width() || reference.height() != predicted.height())
        throw ContractError("region_recovery: mask sizes differ");
    return std::min(majority_overlap(predicted, reference), majority_overlap(reference, predicted));
}

std::vector<int> majority_categories(const RegionMask& reference, std::span<const int> reference_categories,
                                     const RegionMask& predicted) {
    if (reference.width() != predicted.width() || reference.height() != predicted.height())
        throw ContractError("majority_categories: mask sizes differ");
    if (reference_categories.size() < reference.region_count())
        throw ContractError("majority_categories: missing reference categories");
    std::vector<std::map<int, long>> votes(predicted.region_count());
    for (std::size_t i = 0; i < predicted.labels().size(); ++i)
        ++votes[predicted.labels()[i]][reference_categories[reference.labels()[i]]];
    std::vector<int> out(votes.size(), -1);
    for (std::size_t r = 0; r < votes.size(); ++r) {
        long best = -1;
        for (const auto& [category, n] : votes[r])
            if (n > best) {
                best = n;
                out[r] = category;
            }
    }
    return out;
}

std::string category_label(int category, std::span<const std::string> names) {
    if (category >= 0 && static_cast<std::size_t>(category) < names.size())
        return names[static_cast<std::size_t>(category)];
    return std::to_string(category);
}

long ConfusionTable::at(int truth, int predicted) const {
    check_category(truth, categories, "ConfusionTable::at");
    check_category(predicted, categories, "ConfusionTable::at");
    return counts[static_cast<std::size_t>(truth) * static_cast<std::size_t>(categories) +
                  static_cast<std::size_t>(predicted)];
}

long ConfusionTable::row_total(int truth) const {
    long s = 0;
    for (int p = 0; p < categories; ++p) s += at(truth, p);
    return s;
}

double ConfusionTable::row_percent(int truth, int predicted) const {
    const long row = row_total(truth);
    return row ? 100.0 * static_cast<double>(at(truth, predicted)) / static_cast<double>(row) : 0.0;
}

int ConfusionTable::row_percent_rounded(int truth, int predicted) const {
    const long row = row_total(truth);
    if (row == 0) return 0;
    // floor(100 c / row + 1/2) in integers
    return static_cast<int>((200 * at(truth, predicted) + row) / (2 * row));
}

ConfusionTable confusion(std::span<const std::pair<int, int>> pairs, int num_categories) {
    if (num_categories < 0) throw ContractError("confusion: negative category count");
    ConfusionTable t;
    t.categories = num_categories;
    t.counts.assign(static_cast<std::size_t>(num_categories) * static_cast<std::size_t>(num_categories), 0);
    for (const auto& [truth, predicted] : pairs) {
        check_category(truth, num_categories, "confusion");
        check_category(predicted, num_categories, "confusion");
        ++t.counts[static_cast<std::size_t>(truth) * static_cast<std::size_t>(num_categories) +
                   static_cast<std::size_t>(predicted)];
        ++t.total;
        if (truth == predicted) ++t.correct;
    }
    return t;
}

PretestTable pretest_table(std::vector<CategoryCounts> rows) {
    PretestTable t;
    t.rows = std::move(rows);
    for (const auto& row : t.rows) {
        t.train_total += row.train;
        t.test_total += row.test;
        for (auto c : kCombinations) t.totals[static_cast<std::size_t>(c)] += row[c];
        const PaddingStrategy s = choose_strategy(row);
        t.chosen.push_back(s);
        t.ideal_total += s == PaddingStrategy::PadZero ? row[Combination::OZ] : row[Combination::OO];
    }
    return t;
}

double f_measure(double precision, double recall) noexcept {
    const double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

PrfReport prf(std::span<const std::pair<int, std::optional<int>>> predictions, int num_categories) {
    if (num_categories < 0) throw ContractError("prf: negative category count");
    PrfReport report;
    report.rows.resize(static_cast<std::size_t>(num_categories));
    for (int c = 0; c < num_categories; ++c) report.rows[static_cast<std::size_t>(c)].category = c;
    for (const auto& [truth, tag] : predictions) {
        check_category(truth, num_categories, "prf");
        if (tag) check_category(*tag, num_categories, "prf");
        if (tag && *tag == truth) {
            ++report.rows[static_cast<std::size_t>(truth)].tp;
        } else {
            ++report.rows[static_cast<std::size_t>(truth)].fn;
            if (tag) ++report.rows[static_cast<std::size_t>(*tag)].fp;
        }
    }
    double sp = 0.0, sr = 0.0, sf = 0.0;
    std::size_t used = 0;
    for (auto& row : report.rows) {
        if (row.tp + row.fp + row.fn == 0) {
            row.excluded = true;
            report.excluded.push_back(row.category);
            continue;
        }
        row.precision = ratio(row.tp, row.tp + row.fp);
        row.recall = ratio(row.tp, row.tp + row.fn);
        row.f = f_measure(row.precision, row.recall);
        sp += row.precision;
        sr += row.recall;
        sf += row.f;
        ++used;
    }
    if (used) {
        report.mean_precision = sp / static_cast<double>(used);
        report.mean_recall = sr / static_cast<double>(used);
        report.mean_f = sf / static_cast<double>(used);
    }
    return report;
}

AdaptiveComparison compare_adaptive(const std::vector<PretestRecord>& records, const StrategyMap& strategy_map,
                                    std::span<const PaddingStrategy> decisions) {
    if (decisions.size() != records.size())
        throw ContractError("compare_adaptive: decision count differs from record count");
    AdaptiveComparison cmp;
    std::vector<AdaptiveRow> rows;
    auto row_of = [&](int c) -> AdaptiveRow& {
        auto it = std::find_if(rows.begin(), rows.end(), [c](const AdaptiveRow& r) { return r.category == c; });
        if (it != rows.end()) return *it;
        rows.push_back({});
        rows.back().category = c;
        return rows.back();
    };
    auto combo_for = [](PaddingStrategy test) {
        return test == PaddingStrategy::PadZero ? Combination::OZ : Combination::OO;
    };
    for (std::size_t i = 0; i < records.size(); ++i) {
        const PretestRecord& rec = records[i];
        const PaddingStrategy ideal = strategy_map.contains(rec.category) ? strategy_map.at(rec.category)
                                                                          : PaddingStrategy::PadOriginal;
        AdaptiveRow& row = row_of(rec.category);
        ++row.test;
        row.ideal += rec.correct(combo_for(ideal));
        row.adaptive += rec.correct(combo_for(decisions[i]));
        row.fixed_original += rec.correct(Combination::OO);
        row.fixed_zero += rec.correct(Combination::OZ);
        cmp.decisions_matching_map += decisions[i] == ideal;
    }
    std::sort(rows.begin(), rows.end(), [](const AdaptiveRow& a, const AdaptiveRow& b) { return a.category < b.category; });
    for (const auto& row : rows) {
        cmp.total += row.test;
        cmp.ideal += row.ideal;
        cmp.adaptive += row.adaptive;
        cmp.fixed_original += row.fixed_original;
        cmp.fixed_zero += row.fixed_zero;
    }
    cmp.exceeds_ideal = cmp.adaptive > cmp.ideal;
    cmp.rows = std::move(rows);
    return cmp;
}

std::string to_csv(const PretestTable& t, std::span<const std::string> names) {
    std::ostringstream os;
    os << "category,train,test,O/O,Z/Z,O/Z,Z/O,chosen\n";
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        os << category_label(r.category, names) << ',' << r.train << ',' << r.test << ',' << r[Combination::OO] << ','
           << r[Combination::ZZ] << ',' << r[Combination::OZ] << ',' << r[Combination::ZO] << ','
           << (t.chosen[i] == PaddingStrategy::PadZero ? "O/Z" : "O/O") << '\n';
    }
    os << "TOTAL," << t.train_total << ',' << t.test_total << ',' << t.total(Combination::OO) << ','
       << t.total(Combination::ZZ) << ',' << t.total(Combination::OZ) << ',' << t.total(Combination::ZO) << ",\n";
    os << "IDEAL,,," << t.ideal_total << ",,,,\n";
    return os.str();
}

std::string to_csv(const ConfusionTable& t, std::span<const std::string> names, bool percent) {
    std::ostringstream os;
    os << "truth";
    for (int p = 0; p < t.categories; ++p) os << ',' << category_label(p, names);
    os << ",row_total\n";
    for (int r = 0; r < t.categories; ++r) {
        os << category_label(r, names);
        for (int p = 0; p < t.categories; ++p) os << ',' << (percent ? t.row_percent_rounded(r, p) : t.at(r, p));
        os << ',' << t.row_total(r) << '\n';
    }
    os << "Total: " << t.correct << '/' << t.total << '\n';
    return os.str();
}

std::string to_csv(const AdaptiveComparison& c) {
    std::ostringstream os;
    os << "strategy,correct,total\n";
    os << "ideal," << c.ideal << ',' << c.total << '\n';
    os << "adaptive," << c.adaptive << ',' << c.total << '\n';
    os << "O/O," << c.fixed_original << ',' << c.total << '\n';
    os << "O/Z," << c.fixed_zero << ',' << c.total << '\n';
    return os.str();
}

std::string to_csv(const PrfReport& r, std::span<const std::string> names) {
    std::ostringstream os;
    os << "category,precision,recall,f\n";
    for (const auto& row : r.rows) {
        if (row.excluded) continue;
        os << category_label(row.category, names) << ',' << fixed2(row.precision) << ',' << fixed2(row.recall) << ','
           << fixed2(row.f) << '\n';
    }
    os << "Mean," << fixed2(r.mean_precision) << ',' << fixed2(r.mean_recall) << ',' << fixed2(r.mean_f) << '\n';
    return os.str();
}

nlohmann::json to_json(const PretestTable& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        rows.push_back({{"category", r.category},
                        {"train", r.train},
                        {"test", r.test},
                        {"O/O", r[Combination::OO]},
                        {"Z/Z", r[Combination::ZZ]},
                        {"O/Z", r[Combination::OZ]},
                        {"Z/O", r[Combination::ZO]},
                        {"chosen", std::string(to_string(t.chosen[i]))},
                        {"best_combination", std::string(to_string(best_combination(r)))}});
    }
    return {{"rows", rows},
            {"train_total", t.train_total},
            {"test_total", t.test_total},
            {"totals",
             {{"O/O", t.total(Combination::OO)},
              {"Z/Z", t.total(Combination::ZZ)},
              {"O/Z", t.total(Combination::OZ)},
              {"Z/O", t.total(Combination::ZO)}}},
            {"ideal_total", t.ideal_total}};
}

nlohmann::json to_json(const ConfusionTable& t) {
    nlohmann::json counts = nlohmann::json::array();
    nlohmann::json percent = nlohmann::json::array();
    for (int r = 0; r < t.categories; ++r) {
        nlohmann::json crow = nlohmann::json::array();
        nlohmann::json prow = nlohmann::json::array();
        for (int p = 0; p < t.categories; ++p) {
            crow.push_back(t.at(r, p));
            prow.push_back(t.row_percent(r, p));
        }
        counts.push_back(std::move(crow));
        percent.push_back(std::move(prow));
    }
    return {{"categories", t.categories}, {"counts", counts}, {"row_percent", percent},
            {"correct", t.correct},       {"total", t.total}};
}

nlohmann::json to_json(const AdaptiveComparison& c) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : c.rows)
        rows.push_back({{"category", r.category},
                        {"test", r.test},
                        {"ideal", r.ideal},
                        {"adaptive", r.adaptive},
                        {"O/O", r.fixed_original},
                        {"O/Z", r.fixed_zero}});
    return {{"total", c.total},
            {"ideal", c.ideal},
            {"adaptive", c.adaptive},
            {"O/O", c.fixed_original},
            {"O/Z", c.fixed_zero},
            {"decisions_matching_map", c.decisions_matching_map},
            {"exceeds_ideal", c.exceeds_ideal},
            {"rows", rows}};
}

nlohmann::json to_json(const PrfReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"category", row.category},
                        {"tp", row.tp},
                        {"fp", row.fp},
                        {"fn", row.fn},
                        {"precision", row.precision},
                        {"recall", row.recall},
                        {"f", row.f},
                        {"excluded", row.excluded}});
    return {{"rows", rows},
            {"mean_precision", r.mean_precision},
            {"mean_recall", r.mean_recall},
            {"mean_f", r.mean_f},
            {"excluded", r.excluded}};
}

}  // namespace scene
