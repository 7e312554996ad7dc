#include "scene/plsa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "scene/error.hpp"

namespace scene {

namespace {

constexpr double kFloor = 1e-12;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in (0, 1], built from 53 raw bits so the stream is portable.
double unit_open_closed(std::mt19937_64& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

void sample_dirichlet1(std::mt19937_64& rng, std::span<double> out) {
    double sum = 0.0;
    for (auto& v : out) {
        v = -std::log(unit_open_closed(rng));
        sum += v;
    }
    for (auto& v : out) v /= sum;
}

// Neumaier-compensated running sum; order fixed by the caller.
struct CompensatedSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double x) noexcept {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            c += (sum - t) + x;
        else
            c += (x - t) + sum;
        sum = t;
    }
    double value() const noexcept { return sum + c; }
};

bool converged(double prev, double cur, double tol) noexcept {
    return std::abs(cur - prev) <= tol * std::abs(cur);
}

}  // namespace

TermMatrix::TermMatrix(std::size_t rows, std::size_t cols, std::vector<double> data,
                       std::vector<long> region_ids)
    : rows_(rows), cols_(cols), data_(std::move(data)), ids_(std::move(region_ids)) {
    if (data_.size() != rows_ * cols_) throw ContractError("TermMatrix: data size != rows*cols");
    if (ids_.empty()) {
        ids_.resize(rows_);
        std::iota(ids_.begin(), ids_.end(), 0L);
    }
    if (ids_.size() != rows_) throw ContractError("TermMatrix: one region id per row required");
    for (double v : data_)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ContractError("TermMatrix: entries must be finite and >= 0");
    for (std::size_t i = 0; i < rows_; ++i)
        if (!(row_mass(i) > 0.0))
            throw DegenerateRegionError("TermMatrix: region " + std::to_string(ids_[i]) + " has zero mass",
                                        ids_[i]);
}

double TermMatrix::row_mass(std::size_t i) const noexcept {
    const auto r = row(i);
    return std::accumulate(r.begin(), r.end(), 0.0);
}

double TermMatrix::total_mass() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s += row_mass(i);
    return s;
}

TermMatrix build_term_matrix(std::span<const FeatureVector> features, double scale,
                             std::vector<long> region_ids) {
    if (!(scale > 0.0)) throw ContractError("build_term_matrix: scale must be positive");
    if (region_ids.empty()) {
        region_ids.resize(features.size());
        std::iota(region_ids.begin(), region_ids.end(), 0L);
    }
    if (region_ids.size() != features.size())
        throw ContractError("build_term_matrix: one region id per feature required");
    std::vector<double> data;
    data.reserve(features.size() * kFeatureLength);
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (!(features[i].total() > 0.0))
            throw DegenerateRegionError("build_term_matrix: region " + std::to_string(region_ids[i]) +
                                            " has zero mass",
                                        region_ids[i]);
        for (double v : features[i].values) data.push_back(scale * v);
    }
    return TermMatrix(features.size(), kFeatureLength, std::move(data), std::move(region_ids));
}

PlsaModel initialize_model(const TermMatrix& matrix, std::size_t topics, std::uint64_t seed) {
    if (topics < 1) throw ContractError("plsa: topic count must be >= 1");
    if (matrix.rows() == 0) throw ContractError("plsa: empty term matrix");
    PlsaModel m;
    m.topics = topics;
    m.features = matrix.cols();
    m.regions = matrix.rows();
    m.seed = seed;
    m.p_f_given_z.resize(topics * m.features);
    m.p_z_given_r.resize(m.regions * topics);
    m.p_r.resize(m.regions);

    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < m.regions; ++i)
        sample_dirichlet1(rng, {m.p_z_given_r.data() + i * topics, topics});
    for (std::size_t k = 0; k < topics; ++k)
        sample_dirichlet1(rng, {m.p_f_given_z.data() + k * m.features, m.features});

    const double total = matrix.total_mass();
    for (std::size_t i = 0; i < m.regions; ++i) m.p_r[i] = matrix.row_mass(i) / total;
    return m;
}

double em_iteration(PlsaModel& m, const TermMatrix& matrix) {
    const std::size_t K = m.topics;
    const std::size_t M = m.features;
    std::vector<double> next_f(K * M, 0.0);
    std::vector<double> next_z(m.regions * K, 0.0);
    std::vector<double> joint(K);

    for (std::size_t i = 0; i < m.regions; ++i) {
        const auto theta = m.region_row(i);
        double* acc = next_z.data() + i * K;
        for (std::size_t j = 0; j < M; ++j) {
            const double n = matrix.at(i, j);
            if (n == 0.0) continue;
            // E-step: P(z_k | r_i, f_j) proportional to P(z_k|r_i) P(f_j|z_k).
            double denom = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                joint[k] = theta[k] * m.f_given_z(k, j);
                denom += joint[k];
            }
            denom = std::max(denom, kFloor);
            for (std::size_t k = 0; k < K; ++k) {
                const double w = n * joint[k] / denom;
                next_f[k * M + j] += w;
                acc[k] += w;
            }
        }
        const double s = std::accumulate(acc, acc + K, 0.0);
        for (std::size_t k = 0; k < K; ++k) acc[k] = s > 0.0 ? acc[k] / s : 1.0 / static_cast<double>(K);
    }
    for (std::size_t k = 0; k < K; ++k) {
        double* row = next_f.data() + k * M;
        const double s = std::accumulate(row, row + M, 0.0);
        for (std::size_t j = 0; j < M; ++j) row[j] = s > kFloor ? row[j] / s : 1.0 / static_cast<double>(M);
    }
    m.p_f_given_z = std::move(next_f);
    m.p_z_given_r = std::move(next_z);
    ++m.iterations;
    const double L = log_likelihood(m, matrix);
    m.loglik_trace.push_back(L);
    return L;
}

double log_likelihood(const PlsaModel& m, const TermMatrix& matrix, std::string* diagnostic) {
    if (matrix.rows() != m.regions || matrix.cols() != m.features)
        throw ContractError("log_likelihood: model and matrix dimensions differ");
    CompensatedSum L;
    for (std::size_t i = 0; i < m.regions; ++i) {
        for (std::size_t j = 0; j < m.features; ++j) {
            const double n = matrix.at(i, j);
            if (n == 0.0) continue;
            double mix = 0.0;
            for (std::size_t k = 0; k < m.topics; ++k) mix += m.z_given_r(i, k) * m.f_given_z(k, j);
            const double p = m.p_r[i] * mix;
            if (!(p > 0.0)) {
                if (diagnostic)
                    *diagnostic = "P(r_" + std::to_string(i) + ", f_" + std::to_string(j) +
                                  ") = 0 with positive count";
                return -std::numeric_limits<double>::infinity();
            }
            L.add(n * std::log(p));
        }
    }
    return L.value();
}

PlsaModel train(const TermMatrix& matrix, const TrainOptions& opt) {
    if (opt.topics < 1) throw ContractError("plsa train: topics must be >= 1");
    if (opt.max_iters < 1) throw ContractError("plsa train: max_iters must be >= 1");
    const int restarts = std::max(opt.restarts, 1);

    std::optional<PlsaModel> best;
    for (int r = 0; r < restarts; ++r) {
        const std::uint64_t seed = r == 0 ? opt.seed : splitmix64(opt.seed + static_cast<std::uint64_t>(r));
        PlsaModel m = initialize_model(matrix, static_cast<std::size_t>(opt.topics), seed);
        double prev = log_likelihood(m, matrix);
        for (int it = 0; it < opt.max_iters; ++it) {
            const double L = em_iteration(m, matrix);
            if (!std::isfinite(L)) throw NumericalError("plsa train: non-finite log-likelihood");
            if (std::isfinite(prev) && converged(prev, L, opt.tol)) break;
            prev = L;
        }
        if (!best || m.loglik_trace.back() > best->loglik_trace.back()) best = std::move(m);
    }
    best->tol = opt.tol;
    best->restarts = restarts;
    if (static_cast<std::size_t>(opt.topics) > matrix.rows())
        best->warnings.push_back("topic count " + std::to_string(opt.topics) + " exceeds region count " +
                                 std::to_string(matrix.rows()));
    return std::move(*best);
}

FoldInResult fold_in(const PlsaModel& m, std::span<const double> counts, const FoldInOptions& opt) {
    if (counts.size() != m.features)
        throw ContractError("fold_in: feature length " + std::to_string(counts.size()) + " != " +
                            std::to_string(m.features));
    double mass = 0.0;
    for (double v : counts) {
        if (!(v >= 0.0)) throw ContractError("fold_in: negative feature weight");
        mass += v;
    }
    if (!(mass > 0.0)) throw DegenerateRegionError("fold_in: zero-mass feature");

    const std::size_t K = m.topics;
    FoldInResult out;
    out.posterior.assign(K, 1.0 / static_cast<double>(K));
    std::vector<double> acc(K);
    double prev = -std::numeric_limits<double>::infinity();
    if (K > 1) {
        for (int it = 0; it < opt.max_iters; ++it) {
            std::fill(acc.begin(), acc.end(), 0.0);
            CompensatedSum L;
            for (std::size_t j = 0; j < m.features; ++j) {
                const double n = counts[j];
                if (n == 0.0) continue;
                double denom = 0.0;
                for (std::size_t k = 0; k < K; ++k) denom += out.posterior[k] * m.f_given_z(k, j);
                denom = std::max(denom, kFloor);
                L.add(n * std::log(denom));
                for (std::size_t k = 0; k < K; ++k) acc[k] += n * out.posterior[k] * m.f_given_z(k, j) / denom;
            }
            const double s = std::accumulate(acc.begin(), acc.end(), 0.0);
            for (std::size_t k = 0; k < K; ++k) out.posterior[k] = acc[k] / s;
            out.iterations = it + 1;
            const double cur = L.value();
            if (std::isfinite(prev) && converged(prev, cur, opt.tol)) break;
            prev = cur;
        }
    }
    out.ranking.resize(K);
    std::iota(out.ranking.begin(), out.ranking.end(), 0);
    std::stable_sort(out.ranking.begin(), out.ranking.end(), [&](int a, int b) {
        return out.posterior[static_cast<std::size_t>(a)] > out.posterior[static_cast<std::size_t>(b)];
    });
    return out;
}

FoldInResult fold_in(const PlsaModel& model, const FeatureVector& feature, const FoldInOptions& options) {
    return fold_in(model, feature.span(), options);
}

std::size_t argmax(std::span<const double> values) noexcept {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

std::vector<int> map_topics_by_vote(const PlsaModel& m, std::span<const int> region_categories,
                                    int num_categories) {
    if (region_categories.size() != m.regions)
        throw ContractError("map_topics_by_vote: one category per training region required");
    if (num_categories < 1) throw ContractError("map_topics_by_vote: no categories");
    const auto C = static_cast<std::size_t>(num_categories);
    std::vector<std::size_t> votes(m.topics * C, 0);
    std::vector<double> mass(m.topics * C, 0.0);
    for (std::size_t i = 0; i < m.regions; ++i) {
        const int c = region_categories[i];
        if (c < 0 || c >= num_categories) throw ContractError("map_topics_by_vote: category out of range");
        const auto row = m.region_row(i);
        ++votes[argmax(row) * C + static_cast<std::size_t>(c)];
        for (std::size_t k = 0; k < m.topics; ++k) mass[k * C + static_cast<std::size_t>(c)] += row[k];
    }
    std::vector<int> mapping(m.topics, -1);
    for (std::size_t k = 0; k < m.topics; ++k) {
        std::size_t best = 0;
        bool any_vote = false;
        for (std::size_t c = 0; c < C; ++c) {
            if (votes[k * C + c] > votes[k * C + best]) best = c;
            any_vote = any_vote || votes[k * C + c] > 0;
        }
        if (!any_vote) {
            best = 0;
            for (std::size_t c = 1; c < C; ++c)
                if (mass[k * C + c] > mass[k * C + best]) best = c;
            if (!(mass[k * C + best] > 0.0)) continue;
        }
        mapping[k] = static_cast<int>(best);
    }
    return mapping;
}

}  // namespace scene
