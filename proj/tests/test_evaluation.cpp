#include <doctest.h>

#include "oracle/jacobi_svd.hpp"
#include "targeted/evaluation.hpp"
#include "targeted/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace targeted;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::IoError;
}

std::vector<double> unit_vector(std::size_t n, Rng& rng) {
    std::normal_distribution<double> normal;
    std::vector<double> v(n);
    double norm = 0.0;
    for (auto& x : v) {
        x = normal(rng);
        norm += x * x;
    }
    for (auto& x : v) x /= std::sqrt(norm);
    return v;
}

// Unit vector at |cos| = g from `v`.
std::vector<double> at_angle(const std::vector<double>& v, double g, Rng& rng) {
    auto w = unit_vector(v.size(), rng);
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += w[i] * v[i];
    double norm = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        w[i] -= dot * v[i];
        norm += w[i] * w[i];
    }
    const double h = std::sqrt(1.0 - g * g);
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = g * v[i] + h * w[i] / std::sqrt(norm);
    return w;
}

}  // namespace

TEST_CASE("rel_err examples") {
    const DenseMatrix truth(Matrix{{1.0, 2.0}, {3.0, 4.0}});
    CHECK(rel_err(truth, truth) == 0.0);
    CHECK(rel_err(truth, DenseMatrix::zeros(2, 2)) == doctest::Approx(1.0));
    const DenseMatrix half(Matrix{{1.0, 2.0}, {0.0, 0.0}});
    CHECK(rel_err(DenseMatrix(Matrix{{1.0, 1.0}, {1.0, 1.0}}), DenseMatrix(Matrix{{1.0, 1.0}, {0.0, 0.0}})) ==
          doctest::Approx(0.5));
    CHECK(rel_err(truth, half) == doctest::Approx(25.0 / 30.0));
    CHECK(kind_of([&] { rel_err(DenseMatrix::zeros(2, 2), truth); }) == ErrorKind::ZeroTruth);
    CHECK(kind_of([&] { rel_err(truth, DenseMatrix::zeros(2, 3)); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("rel_err_over restricts to the descriptor") {
    const DenseMatrix truth(Matrix{{1.0, 2.0}, {3.0, 4.0}});
    const DenseMatrix est(Matrix{{1.0, 0.0}, {3.0, 4.0}});
    CHECK(rel_err_over(truth, est, SubmatrixDescriptor::make({0}, {1})) == doctest::Approx(1.0));
    CHECK(rel_err_over(truth, est, SubmatrixDescriptor::make({1}, {0, 1})) == 0.0);
    CHECK(kind_of([&] { rel_err_over(truth, est, SubmatrixDescriptor::make({2}, {0})); }) ==
          ErrorKind::InvalidArgument);
}

TEST_CASE("f_score examples") {
    const auto a = SubmatrixDescriptor::make({0, 1}, {0, 1});
    CHECK(f_score(a, a) == 1.0);
    CHECK(f_score(a, SubmatrixDescriptor::make({2, 3}, {0, 1})) == 0.0);
    // 2 shared cells, |T| = 4, |F| = 2.
    const auto b = SubmatrixDescriptor::make({0}, {0, 1});
    CHECK(f_score(a, b) == doctest::Approx(2.0 / 3.0));
    CHECK(f_score(b, a) == f_score(a, b));
    const auto axes = f_score_per_axis(a, b);
    CHECK(axes.rows == doctest::Approx(2.0 / 3.0));
    CHECK(axes.cols == 1.0);
    SubmatrixDescriptor empty;
    CHECK(kind_of([&] { f_score(a, empty); }) == ErrorKind::EmptyDescriptor);
}

TEST_CASE("rank-one lambda oracle: closed cases and Vieta identities") {
    auto [p, m] = rank1_lambda_oracle(3.0, 2.0, 0.0);
    CHECK(p == doctest::Approx(9.0));
    CHECK(m == doctest::Approx(4.0));
    std::tie(p, m) = rank1_lambda_oracle(2.0, 2.0, 1.0);
    CHECK(p == doctest::Approx(8.0));
    CHECK(m == 0.0);

    Rng rng(1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double s = 0.1 + 5.0 * unit(rng);
        const double t = 0.1 + 5.0 * unit(rng);
        const double g = unit(rng);
        const auto [hi, lo] = rank1_lambda_oracle(s, t, g);
        CHECK(hi >= lo);
        CHECK(std::abs(hi + lo - (s * s + t * t)) <= 1e-10 * (s * s + t * t));
        CHECK(std::abs(hi * lo - s * s * t * t * (1 - g * g)) <= 1e-10 * s * s * t * t);
    }
    CHECK(kind_of([] { rank1_lambda_oracle(1.0, 1.0, 1.5); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("rank-one lambda oracle matches stacked two-block constructions") {
    Rng rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t a = 3 + trial % 4, b = 2 + trial % 5, c = 6;
        const double s = 0.5 + 3.0 * unit(rng);
        const double t = 0.5 + 3.0 * unit(rng);
        const double g = unit(rng);
        const auto u1 = unit_vector(a, rng);
        const auto u2 = unit_vector(b, rng);
        const auto v1 = unit_vector(c, rng);
        const auto v2 = at_angle(v1, g, rng);
        std::vector<double> flat((a + b) * c);
        for (std::size_t i = 0; i < a; ++i) {
            for (std::size_t j = 0; j < c; ++j) flat[i * c + j] = s * u1[i] * v1[j];
        }
        for (std::size_t i = 0; i < b; ++i) {
            for (std::size_t j = 0; j < c; ++j) flat[(a + i) * c + j] = t * u2[i] * v2[j];
        }
        const auto ref = oracle::jacobi_svd(flat, a + b, c);
        const auto [hi, lo] = rank1_lambda_oracle(s, t, g);
        const double scale = s * s + t * t;
        CHECK(std::abs(ref.values[0] * ref.values[0] - hi) <= 1e-8 * scale);
        CHECK(std::abs(ref.values[1] * ref.values[1] - lo) <= 1e-8 * scale);
    }
}

TEST_CASE("rel_err and f_score are invariant to a shared permutation") {
    const auto truth = low_rank_gaussian(6, 5, 2, 3);
    const auto est = low_rank_gaussian(6, 5, 2, 4);
    const std::vector<std::size_t> pr{3, 0, 5, 1, 4, 2}, pc{4, 2, 0, 3, 1};
    CHECK(rel_err(truth.select(pr, pc), est.select(pr, pc)) == doctest::Approx(rel_err(truth, est)));

    const auto t = SubmatrixDescriptor::make({0, 1, 2}, {1, 2});
    const auto f = SubmatrixDescriptor::make({1, 2, 5}, {2, 4});
    // Position of each original index after permuting.
    auto map = [](const std::vector<std::size_t>& idx, const std::vector<std::size_t>& perm) {
        std::vector<std::size_t> out;
        for (auto i : idx) out.push_back(static_cast<std::size_t>(std::find(perm.begin(), perm.end(), i) - perm.begin()));
        return out;
    };
    const auto tp = SubmatrixDescriptor::make(map(t.rows, pr), map(t.cols, pc));
    const auto fp = SubmatrixDescriptor::make(map(f.rows, pr), map(f.cols, pc));
    CHECK(f_score(tp, fp) == doctest::Approx(f_score(t, f)));
}

TEST_CASE("sweep variable and method names") {
    CHECK(parse_swept_var("density") == SweptVar::Density);
    CHECK(parse_swept_var("subrank") == SweptVar::SubRank);
    CHECK(parse_swept_var("subsize") == SweptVar::SubSize);
    CHECK(parse_swept_var("backrank") == SweptVar::BackRank);
    CHECK(parse_swept_var("pi") == SweptVar::Pi);
    CHECK(swept_var_name(SweptVar::BackRank) == "backrank");
    CHECK(parse_sweep_methods("both") == SweepMethods::Both);
    CHECK(parse_sweep_methods("discover") == SweepMethods::Discover);
    CHECK_THROWS_AS(parse_swept_var("noise"), Error);
    CHECK_THROWS_AS(parse_sweep_methods("all"), Error);
}

TEST_CASE("a fully observed sweep point is recovered and written as CSV") {
    SweepSpec spec;
    spec.n = 60;
    spec.m = 50;
    spec.background_rank = 4;
    spec.plants = {PlantSpec{8, 8, 1, 1.2, {}}};
    spec.var = SweptVar::Density;
    spec.grid = {1.0};
    spec.methods = SweepMethods::Plain;
    spec.targeted.completion.tol = 1e-10;
    const auto rows = run_sweep(spec, 3);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].error.empty());
    REQUIRE(rows[0].relerr_m);
    CHECK(*rows[0].relerr_m <= 1e-4);
    REQUIRE(rows[0].relerr_s.size() == 1);
    CHECK(rows[0].relerr_s[0].has_value());
    CHECK(!rows[0].time_complete_s);

    std::ostringstream out;
    write_sweep_csv(out, rows, false);
    const std::string csv = out.str();
    CHECK(csv.rfind("swept_var,value,seed,method,relerr_M,relerr_S1,relerr_S2,relerr_S3,fscore_S1,fscore_S2,"
                    "fscore_S3,time_discover_s,time_complete_s\n",
                    0) == 0);
    CHECK(csv.find("\ndensity,1,0,plain,") != std::string::npos);

    std::ostringstream axes;
    write_sweep_csv(axes, rows, true);
    CHECK(axes.str().find(",fscore_rows_S1,fscore_cols_S1,") != std::string::npos);
}

TEST_CASE("sweep rows are ordered, deterministic, and record failures") {
    SweepSpec spec;
    spec.n = 40;
    spec.m = 40;
    spec.background_rank = 3;
    spec.plants = {PlantSpec{6, 6, 1, 1.5, {}}};
    spec.var = SweptVar::SubRank;
    spec.grid = {1.0, 9.0};  // rank 9 does not fit a 6 x 6 plant
    spec.seeds = 2;
    spec.density = 0.8;
    spec.methods = SweepMethods::Both;
    const auto rows = run_sweep(spec, 10);
    REQUIRE(rows.size() == 8);
    const char* methods[] = {"plain", "targeted"};
    for (std::size_t r = 0; r < 8; ++r) {
        CHECK(rows[r].value == spec.grid[r / 4]);
        CHECK(rows[r].seed == (r / 2) % 2);
        CHECK(rows[r].method == methods[r % 2]);
    }
    for (std::size_t r = 0; r < 4; ++r) CHECK(rows[r].error.empty());
    for (std::size_t r = 4; r < 8; ++r) {
        CHECK(!rows[r].error.empty());
        CHECK(!rows[r].relerr_m);
    }
    const auto again = run_sweep(spec, 10);
    for (std::size_t r = 0; r < 4; ++r) CHECK(again[r].relerr_m == rows[r].relerr_m);

    std::ostringstream out;
    write_sweep_csv(out, rows, false);
    CHECK(out.str().find("\nsubrank,9,1,targeted,,,,,,,,,\n") != std::string::npos);

    spec.grid.clear();
    CHECK_THROWS_AS(run_sweep(spec, 1), Error);
}
