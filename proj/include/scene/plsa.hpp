#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scene/descriptor.hpp"

namespace scene {

/// Non-negative region x feature weights n(r_i, f_j), row-major.
class TermMatrix {
public:
    TermMatrix() = default;
    /// Throws ContractError on negative entries, DegenerateRegionError on a zero-mass row.
    TermMatrix(std::size_t rows, std::size_t cols, std::vector<double> data,
               std::vector<long> region_ids = {});

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double at(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
    const std::vector<double>& data() const noexcept { return data_; }
    const std::vector<long>& region_ids() const noexcept { return ids_; }
    double row_mass(std::size_t i) const noexcept;
    double total_mass() const noexcept;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
    std::vector<long> ids_;
};

/// n(r_i, f_j) = scale * feature_i[j]. Region ids default to positions.
TermMatrix build_term_matrix(std::span<const FeatureVector> features, double scale = 100.0,
                             std::vector<long> region_ids = {});

struct TrainOptions {
    int topics = 8;
    int max_iters = 500;
    double tol = 1e-6;  // relative change of L
    std::uint64_t seed = 0;
    int restarts = 3;
};

struct PlsaModel {
    std::size_t topics = 0;
    std::size_t features = 0;
    std::size_t regions = 0;
    std::vector<double> p_f_given_z;  // topics x features
    std::vector<double> p_z_given_r;  // regions x topics
    std::vector<double> p_r;          // regions
    std::vector<double> loglik_trace;
    std::uint64_t seed = 0;
    int iterations = 0;
    double tol = 0.0;
    int restarts = 1;
    std::vector<std::string> warnings;

    double f_given_z(std::size_t k, std::size_t j) const noexcept { return p_f_given_z[k * features + j]; }
    double z_given_r(std::size_t i, std::size_t k) const noexcept { return p_z_given_r[i * topics + k]; }
    std::span<const double> topic_row(std::size_t k) const noexcept {
        return {p_f_given_z.data() + k * features, features};
    }
    std::span<const double> region_row(std::size_t i) const noexcept {
        return {p_z_given_r.data() + i * topics, topics};
    }
};

/// Seeded Dirichlet(1) initialisation of P(z|r) and P(f|z); P(r) from row masses.
PlsaModel initialize_model(const TermMatrix& matrix, std::size_t topics, std::uint64_t seed);

/// One E-step + M-step in place. Returns the log-likelihood after the update.
double em_iteration(PlsaModel& model, const TermMatrix& matrix);

/// EM with restarts; keeps the restart with the highest final likelihood.
PlsaModel train(const TermMatrix& matrix, const TrainOptions& options);

/// L = sum_ij n_ij log P(r_i, f_j). Returns -infinity (and fills `diagnostic`)
/// when a positive count meets zero probability.
double log_likelihood(const PlsaModel& model, const TermMatrix& matrix,
                      std::string* diagnostic = nullptr);

struct FoldInOptions {
    int max_iters = 500;
    double tol = 1e-9;
};

struct FoldInResult {
    std::vector<double> posterior;  // P(z | new region)
    std::vector<int> ranking;       // topics by descending posterior, ties to lower index
    int iterations = 0;
};

/// EM over P(z | new region) with P(f|z) frozen. Starts from the uniform posterior.
FoldInResult fold_in(const PlsaModel& model, std::span<const double> counts,
                     const FoldInOptions& options = {});
FoldInResult fold_in(const PlsaModel& model, const FeatureVector& feature,
                     const FoldInOptions& options = {});

/// Topic -> category names by majority vote of training regions' argmax topics.
/// Topics that are no region's argmax fall back to the category holding the
/// most posterior mass on them. Entries are -1 only when no training region exists.
std::vector<int> map_topics_by_vote(const PlsaModel& model, std::span<const int> region_categories,
                                    int num_categories);

/// Index of the largest entry, ties to the lower index.
std::size_t argmax(std::span<const double> values) noexcept;

}  // namespace scene
