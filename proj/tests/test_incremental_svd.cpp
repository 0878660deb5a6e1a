#include <doctest.h>

#include "oracle/jacobi_svd.hpp"
#include "targeted/incremental_svd.hpp"

#include <cmath>

using namespace targeted;

namespace {

std::vector<double> flat(const Matrix& a) { return std::vector<double>(a.data(), a.data() + a.size()); }

double abs_cos(const Vector& a, const std::vector<double>& b) {
    double dot = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        dot += a(static_cast<Eigen::Index>(i)) * b[i];
        nb += b[i] * b[i];
    }
    return std::abs(dot) / (a.norm() * std::sqrt(nb));
}

}  // namespace

TEST_CASE("rank-1 recovery on a fully observed matrix") {
    Vector u(30), v(20);
    for (int i = 0; i < 30; ++i) u(i) = std::sin(0.3 * i) + 1.5;
    for (int j = 0; j < 20; ++j) v(j) = std::cos(0.7 * j);
    const DenseMatrix m(Matrix(u * v.transpose()));
    IncSvdConfig cfg;
    const auto r = estimate_singular_vectors(ObservedMatrix::from_dense(m), cfg, 1);
    std::vector<double> vv(v.data(), v.data() + v.size());
    CHECK(abs_cos(r.basis.right.col(0), vv) >= 0.999);
}

TEST_CASE("leading vector of a seeded 50x40 matrix matches the exact SVD") {
    const auto m = low_rank_gaussian(50, 40, 40, 21);
    const auto ref = oracle::jacobi_svd(flat(m.values()), 50, 40);
    IncSvdConfig cfg;
    const auto r = estimate_singular_vectors(ObservedMatrix::from_dense(m), cfg, 3);
    CHECK(abs_cos(r.basis.right.col(0), ref.right[0]) >= 0.99);
}

TEST_CASE("subspace affinity at 50% observed, rank 3") {
    const auto m = low_rank_gaussian(100, 80, 3, 8);
    const auto ref = oracle::jacobi_svd(flat(m.values()), 100, 80);
    ColMatrix v(80, 3);
    for (int d = 0; d < 3; ++d) {
        for (int j = 0; j < 80; ++j) v(j, d) = ref.right[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)];
    }
    IncSvdConfig cfg;
    cfg.k = 3;
    const auto r = estimate_singular_vectors(mask_uniform(m, 0.5, 4), cfg, 4);
    const double affinity = (r.basis.right.transpose() * v).norm() / std::sqrt(3.0);
    CHECK(affinity >= 0.95);
}

TEST_CASE("outputs are orthonormal and the per-feature RMSE never rises") {
    const auto m = low_rank_gaussian(60, 45, 5, 2);
    IncSvdConfig cfg;
    cfg.k = 4;
    const auto r = estimate_singular_vectors(mask_uniform(m, 0.6, 3), cfg, 9);
    REQUIRE(r.basis.k() == 4);
    const ColMatrix gram = r.basis.right.transpose() * r.basis.right;
    CHECK((gram - ColMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-6);
    const ColMatrix lgram = r.basis.left.transpose() * r.basis.left;
    CHECK((lgram - ColMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-6);
    REQUIRE(r.rmse.size() == 4);
    for (const auto& history : r.rmse) {
        for (std::size_t e = 1; e < history.size(); ++e) CHECK(history[e] <= history[e - 1] + 1e-9);
    }
    for (Eigen::Index i = 1; i < r.basis.values.size(); ++i) CHECK(r.basis.values(i) <= r.basis.values(i - 1));
}

TEST_CASE("deterministic per seed") {
    const auto m = mask_uniform(low_rank_gaussian(30, 30, 3, 5), 0.7, 1);
    IncSvdConfig cfg;
    cfg.k = 2;
    const auto a = estimate_singular_vectors(m, cfg, 77);
    const auto b = estimate_singular_vectors(m, cfg, 77);
    CHECK(a.basis.right == b.basis.right);
    CHECK(a.basis.left == b.basis.left);
    CHECK(a.basis.values == b.basis.values);
}

TEST_CASE("error and warning paths") {
    IncSvdConfig cfg;
    try {
        estimate_singular_vectors(ObservedMatrix(4, 4, {}), cfg, 1);
        FAIL("expected EmptyObservation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyObservation);
    }
    cfg.k = 5;
    const ObservedMatrix small(4, 4, {{0, 0, 1.0}, {1, 1, 2.0}});
    CHECK_THROWS_AS(estimate_singular_vectors(small, cfg, 1), Error);
    cfg.k = 2;
    const auto r = estimate_singular_vectors(small, cfg, 1);
    CHECK(!r.warning.empty());
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
