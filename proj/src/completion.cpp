#include "targeted/completion.hpp"

#include "targeted/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace targeted {

namespace {

constexpr double kRidgeScale = 1e-6;
constexpr double kRankSvdTol = 1e-6;
constexpr int kRankSvdMaxIter = 300;

// Compressed lists of observed cells per row (or per column).
struct Adjacency {
    std::vector<std::size_t> start;  // size n + 1
    std::vector<Eigen::Index> other;
    std::vector<double> value;

    std::size_t count(std::size_t i) const { return start[i + 1] - start[i]; }
};

Adjacency build_adjacency(const ObservedMatrix& m, bool by_row) {
    const std::size_t n = by_row ? m.rows() : m.cols();
    Adjacency adj;
    adj.start.assign(n + 1, 0);
    for (const Entry& e : m.entries()) ++adj.start[(by_row ? e.row : e.col) + 1];
    for (std::size_t i = 0; i < n; ++i) adj.start[i + 1] += adj.start[i];
    adj.other.resize(m.size());
    adj.value.resize(m.size());
    std::vector<std::size_t> fill(adj.start.begin(), adj.start.end() - 1);
    for (const Entry& e : m.entries()) {
        const std::size_t slot = fill[by_row ? e.row : e.col]++;
        adj.other[slot] = static_cast<Eigen::Index>(by_row ? e.col : e.row);
        adj.value[slot] = e.value;
    }
    return adj;
}

// Solves every factor row of `target` against the fixed factor `fixed`.
void solve_side(const Adjacency& adj, const ColMatrix& fixed, double ridge, ColMatrix& target) {
    const Eigen::Index r = fixed.cols();
    const auto n = static_cast<std::ptrdiff_t>(adj.start.size() - 1);
#pragma omp parallel
    {
        ColMatrix gathered;
        ColMatrix gram(r, r);
        Vector rhs(r);
        Vector obs;
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto row = static_cast<std::size_t>(i);
            const std::size_t count = adj.count(row);
            if (count == 0) continue;
            const std::size_t base = adj.start[row];
            gathered.resize(static_cast<Eigen::Index>(count), r);
            obs.resize(static_cast<Eigen::Index>(count));
            for (std::size_t a = 0; a < count; ++a) {
                gathered.row(static_cast<Eigen::Index>(a)) = fixed.row(adj.other[base + a]);
                obs(static_cast<Eigen::Index>(a)) = adj.value[base + a];
            }
            gram.setZero();
            gram.selfadjointView<Eigen::Lower>().rankUpdate(gathered.transpose());
            gram.diagonal().array() += ridge;
            rhs.noalias() = gathered.transpose() * obs;
            Eigen::LLT<ColMatrix> llt(gram);
            target.row(i) = llt.solve(rhs).transpose();
        }
    }
}

double omega_residual(const ObservedMatrix& m, const ColMatrix& x, const ColMatrix& y) {
    double err = 0.0;
    for (const Entry& e : m.entries()) {
        const double fit = x.row(static_cast<Eigen::Index>(e.row)).dot(y.row(static_cast<Eigen::Index>(e.col)));
        err += (fit - e.value) * (fit - e.value);
    }
    return std::sqrt(err);
}

}  // namespace

void CompletionConfig::validate() const {
    if (rank && *rank < 1) throw Error(ErrorKind::InvalidRank, "rank must be >= 1");
    if (max_rank < 1) throw Error(ErrorKind::InvalidArgument, "max_rank must be >= 1");
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be > 0");
    if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be >= 1");
}

std::size_t estimate_rank(const ObservedMatrix& m, std::size_t max_rank) {
    if (m.empty()) throw Error(ErrorKind::EmptyObservation, "no observed entries");
    const std::size_t dim = std::min(m.rows(), m.cols());
    const std::size_t cap = std::min(max_rank, dim);
    if (cap <= 1 || dim <= 1) return 1;
    const Matrix rescaled = fill_zeros(m).values() / m.density();
    if (rescaled.squaredNorm() == 0.0) return 1;
    const std::size_t k = std::min(cap + 1, dim);
    const Vector s = partial_svd(rescaled, k, kRankSvdTol, kRankSvdMaxIter).basis.values;
    const double floor = 1e-12 * s(0);
    std::size_t best = 1;
    double best_ratio = -1.0;
    for (std::size_t i = 1; i < k && i <= cap; ++i) {
        const double next = s(static_cast<Eigen::Index>(i));
        const double ratio = next <= floor ? std::numeric_limits<double>::infinity()
                                           : s(static_cast<Eigen::Index>(i - 1)) / next;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = i;
        }
        if (std::isinf(ratio)) break;
    }
    return best;
}

CompletionOutput complete(const ObservedMatrix& m, const CompletionConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (m.empty()) throw Error(ErrorKind::EmptyObservation, "no observed entries");
    const std::size_t dim = std::min(m.rows(), m.cols());
    std::size_t rank = 0;
    if (cfg.rank) {
        rank = *cfg.rank;
        if (rank > dim) {
            throw Error(ErrorKind::RankTooLarge,
                        "rank " + std::to_string(rank) + " exceeds min(n, m) = " + std::to_string(dim));
        }
    } else {
        rank = estimate_rank(m, std::min(cfg.max_rank, dim));
    }

    const Adjacency by_row = build_adjacency(m, true);
    const Adjacency by_col = build_adjacency(m, false);
    double observed_sq = 0.0;
    for (const Entry& e : m.entries()) observed_sq += e.value * e.value;
    const double observed_norm = std::sqrt(observed_sq);
    const double mean_sq = observed_sq / static_cast<double>(m.size());
    const double ridge = kRidgeScale * (mean_sq > 0.0 ? mean_sq : 1.0);

    const auto n = static_cast<Eigen::Index>(m.rows());
    const auto cols = static_cast<Eigen::Index>(m.cols());
    const auto r = static_cast<Eigen::Index>(rank);
    ColMatrix x = ColMatrix::Zero(n, r);
    ColMatrix y(cols, r);
    Rng rng(seed);
    std::normal_distribution<double> normal;
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index c = 0; c < r; ++c) y(j, c) = normal(rng);
    }

    CompletionOutput out;
    out.used_rank = rank;
    for (std::size_t i = 0; i < m.rows(); ++i) out.unobserved_rows += by_row.count(i) == 0;
    for (std::size_t j = 0; j < m.cols(); ++j) out.unobserved_cols += by_col.count(j) == 0;

    double previous = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= cfg.max_iter; ++it) {
        solve_side(by_row, y, ridge, x);
        solve_side(by_col, x, ridge, y);
        const double err = omega_residual(m, x, y);
        const double residual = observed_norm > 0.0 ? err / observed_norm : err;
        out.residual_history.push_back(residual);
        out.iterations = it;
        out.final_residual = residual;
        if (residual <= 1e-14) break;
        if (std::isfinite(previous) && previous - residual < cfg.tol) break;
        previous = residual;
    }
    out.estimate = DenseMatrix(Matrix(x * y.transpose()));
    return out;
}

}  // namespace targeted
