#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "reference_tables.hpp"
#include "scene/error.hpp"
#include "scene/plsa.hpp"

using namespace scene;

namespace {

TermMatrix toy_matrix() {
    std::vector<double> flat;
    for (const auto& r : reference::block_diagonal_toy()) flat.insert(flat.end(), r.begin(), r.end());
    return TermMatrix(4, 4, flat);
}

// Direct double sum of n_ij log(P(r_i) sum_k P(z_k|r_i) P(f_j|z_k)).
double brute_loglik(const PlsaModel& m, const TermMatrix& t) {
    double L = 0;
    for (std::size_t i = 0; i < t.rows(); ++i)
        for (std::size_t j = 0; j < t.cols(); ++j) {
            if (t.at(i, j) == 0) continue;
            double p = 0;
            for (std::size_t k = 0; k < m.topics; ++k) p += m.p_z_given_r[i * m.topics + k] * m.p_f_given_z[k * m.features + j];
            L += t.at(i, j) * std::log(m.p_r[i] * p);
        }
    return L;
}

TermMatrix random_matrix(std::size_t rows, std::size_t cols, unsigned seed) {
    std::mt19937 rng(seed);
    std::vector<double> d(rows * cols);
    for (auto& v : d) v = rng() % 4 == 0 ? 0.0 : (rng() % 1000) / 100.0;
    for (std::size_t i = 0; i < rows; ++i) d[i * cols] += 1.0;
    return TermMatrix(rows, cols, d);
}

}  // namespace

TEST_CASE("term matrix construction") {
    FeatureVector f;
    f[3] = 0.25;
    f[100] = 0.75;
    const TermMatrix t = build_term_matrix(std::vector<FeatureVector>{f}, 100.0);
    CHECK(t.row_mass(0) == doctest::Approx(100.0));
    const TermMatrix one = build_term_matrix(std::vector<FeatureVector>{f}, 1.0);
    for (std::size_t j = 0; j < 144; ++j) CHECK(one.at(0, j) == f[j]);
    CHECK(one.region_ids() == std::vector<long>{0});
    CHECK_THROWS_AS(build_term_matrix(std::vector<FeatureVector>{FeatureVector{}}), DegenerateRegionError);
    CHECK_THROWS_AS(TermMatrix(1, 2, {1.0, -1.0}), ContractError);
}

TEST_CASE("EM is invariant to a uniform count scale") {
    const TermMatrix a = random_matrix(10, 30, 1);
    std::vector<double> scaled = a.data();
    for (auto& v : scaled) v *= 100.0;
    const TermMatrix b(10, 30, scaled);
    PlsaModel ma = initialize_model(a, 4, 77), mb = initialize_model(b, 4, 77);
    for (int i = 0; i < 50; ++i) {
        const double la = em_iteration(ma, a), lb = em_iteration(mb, b);
        CHECK(lb == doctest::Approx(100.0 * la).epsilon(1e-10));
    }
    for (std::size_t i = 0; i < ma.p_f_given_z.size(); ++i) CHECK(std::abs(ma.p_f_given_z[i] - mb.p_f_given_z[i]) < 1e-8);
    for (std::size_t i = 0; i < ma.p_z_given_r.size(); ++i) CHECK(std::abs(ma.p_z_given_r[i] - mb.p_z_given_r[i]) < 1e-8);
}

TEST_CASE("one topic is solved by a single iteration") {
    const TermMatrix t = random_matrix(6, 9, 2);
    PlsaModel m = initialize_model(t, 1, 3);
    em_iteration(m, t);
    std::vector<double> col(9, 0.0);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 9; ++j) col[j] += t.at(i, j);
    for (std::size_t j = 0; j < 9; ++j) CHECK(m.f_given_z(0, j) == doctest::Approx(col[j] / t.total_mass()));
    for (std::size_t i = 0; i < 6; ++i) CHECK(m.z_given_r(i, 0) == doctest::Approx(1.0));
}

TEST_CASE("block-diagonal toy corpus") {
    const TermMatrix t = toy_matrix();
    TrainOptions opt;
    opt.topics = 2;
    opt.max_iters = 20000;
    opt.tol = 1e-15;
    opt.seed = 11;
    const PlsaModel m = train(t, opt);
    // Each topic lives on one block.
    for (std::size_t k = 0; k < 2; ++k) {
        const double first = m.f_given_z(k, 0) + m.f_given_z(k, 1);
        const double second = m.f_given_z(k, 2) + m.f_given_z(k, 3);
        CHECK(std::min(first, second) < 1e-9);
    }
    // At the optimum each topic is its block's column distribution, so
    // L = sum n_ij log(P(r_i) * colmass_j / blockmass).
    const double block_mass[2] = {t.row_mass(0) + t.row_mass(1), t.row_mass(2) + t.row_mass(3)};
    double expected = 0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            if (t.at(i, j) == 0) continue;
            const double col = t.at(i < 2 ? 0 : 2, j) + t.at(i < 2 ? 1 : 3, j);
            expected += t.at(i, j) * std::log(t.row_mass(i) / t.total_mass() * col / block_mass[i / 2]);
        }
    CHECK(m.loglik_trace.back() == doctest::Approx(expected).epsilon(1e-10));
    CHECK(log_likelihood(m, t) == doctest::Approx(brute_loglik(m, t)).epsilon(1e-12));
}

TEST_CASE("log-likelihood closed forms") {
    SUBCASE("single cell") {
        const TermMatrix t(1, 1, {5.0});
        TrainOptions opt;
        opt.topics = 1;
        CHECK(std::abs(train(t, opt).loglik_trace.back()) < 1e-12);
    }
    SUBCASE("uniform 2x2") {
        const TermMatrix t(2, 2, {1, 1, 1, 1});
        TrainOptions opt;
        opt.topics = 1;
        const PlsaModel m = train(t, opt);
        CHECK(m.p_r[0] == doctest::Approx(0.5));
        CHECK(m.f_given_z(0, 1) == doctest::Approx(0.5));
        CHECK(m.loglik_trace.back() == doctest::Approx(4 * std::log(0.25)));
    }
    SUBCASE("random models against the direct sum") {
        const TermMatrix t = random_matrix(7, 12, 8);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const PlsaModel m = initialize_model(t, 3, seed);
            CHECK(log_likelihood(m, t) == doctest::Approx(brute_loglik(m, t)).epsilon(1e-12));
        }
    }
    SUBCASE("zero probability on a positive count") {
        const TermMatrix t(1, 2, {1, 1});
        PlsaModel m = initialize_model(t, 1, 0);
        m.p_f_given_z = {1.0, 0.0};
        std::string why;
        CHECK(std::isinf(log_likelihood(m, t, &why)));
        CHECK(!why.empty());
    }
}

TEST_CASE("training is monotone, normalised and seeded") {
    const TermMatrix t = random_matrix(15, 40, 3);
    TrainOptions opt;
    opt.topics = 5;
    opt.seed = 42;
    const PlsaModel a = train(t, opt), b = train(t, opt);
    CHECK(a.p_f_given_z == b.p_f_given_z);
    CHECK(a.loglik_trace == b.loglik_trace);
    for (std::size_t i = 1; i < a.loglik_trace.size(); ++i) CHECK(a.loglik_trace[i] >= a.loglik_trace[i - 1] - 1e-9);
    for (std::size_t k = 0; k < 5; ++k) {
        const auto row = a.topic_row(k);
        CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < 15; ++i) {
        const auto row = a.region_row(i);
        CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    opt.topics = 20;
    CHECK_FALSE(train(t, opt).warnings.empty());
    opt.topics = 0;
    CHECK_THROWS_AS(train(t, opt), ContractError);
}

TEST_CASE("reference-scale shapes") {
    const TermMatrix t = random_matrix(1324, 144, 4);
    TrainOptions opt;
    opt.topics = 8;
    opt.max_iters = 2;
    opt.restarts = 1;
    const PlsaModel m = train(t, opt);
    CHECK(m.p_z_given_r.size() == 8 * 1324);
    CHECK(m.p_f_given_z.size() == 8 * 144);
    CHECK(m.region_row(1323).size() == 8);
}

TEST_CASE("folding in") {
    const TermMatrix t = toy_matrix();
    TrainOptions opt;
    opt.topics = 2;
    opt.max_iters = 20000;
    opt.tol = 1e-15;
    const PlsaModel m = train(t, opt);
    FoldInOptions fo;
    fo.tol = 1e-10;
    fo.max_iters = 10000;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto r = fold_in(m, t.row(i), fo);
        double tv = 0;
        for (std::size_t k = 0; k < 2; ++k) tv += std::abs(r.posterior[k] - m.z_given_r(i, k));
        CHECK(tv / 2 < 1e-4);
        CHECK(r.ranking[0] == static_cast<int>(argmax(r.posterior)));
    }
    for (std::size_t k = 0; k < 2; ++k) {
        const auto row = m.topic_row(k);
        CHECK(argmax(fold_in(m, row, fo).posterior) == k);
    }

    PlsaModel single = train(t, {.topics = 1});
    const auto r = fold_in(single, t.row(2));
    CHECK(r.posterior == std::vector<double>{1.0});
    CHECK_THROWS_AS(fold_in(m, std::vector<double>{1, 2, 3}), ContractError);
    CHECK_THROWS_AS(fold_in(m, std::vector<double>{0, 0, 0, 0}), DegenerateRegionError);
}

TEST_CASE("topic naming by vote") {
    const TermMatrix t = toy_matrix();
    TrainOptions opt;
    opt.topics = 2;
    opt.tol = 1e-12;
    opt.max_iters = 5000;
    const PlsaModel m = train(t, opt);
    const std::vector<int> cats = {1, 1, 0, 0};
    const auto mapping = map_topics_by_vote(m, cats, 2);
    for (std::size_t i = 0; i < 4; ++i) CHECK(mapping[argmax(m.region_row(i))] == cats[i]);

    // A topic nobody votes for falls back to posterior mass.
    opt.topics = 3;
    const PlsaModel m3 = train(t, opt);
    const auto map3 = map_topics_by_vote(m3, cats, 2);
    for (int c : map3) CHECK((c == 0 || c == 1));
    CHECK_THROWS_AS(map_topics_by_vote(m, std::vector<int>{0, 1}, 2), ContractError);
}

TEST_CASE("argmax ties go to the lower index") {
    CHECK(argmax(std::vector<double>{0.2, 0.4, 0.4}) == 1);
    CHECK(argmax(std::vector<double>{1.0}) == 0);
}
