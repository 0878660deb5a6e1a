#include "targeted/incremental_svd.hpp"

#include "targeted/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace targeted {

namespace {

constexpr double kInitValue = 0.1;
constexpr double kInitNoise = 1e-3;
constexpr double kRmseSlack = 1e-9;
constexpr int kMaxBackoffs = 40;
constexpr double kRateGrowth = 1.1;
// The stopping test compares RMSE across this many accepted epochs.
constexpr std::size_t kWindow = 10;

double rmse_of(const std::vector<Entry>& entries, const std::vector<double>& residual,
               const Vector& u, const Vector& v) {
    double sum = 0.0;
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const double err = residual[e] - u(static_cast<Eigen::Index>(entries[e].row)) *
                                             v(static_cast<Eigen::Index>(entries[e].col));
        sum += err * err;
    }
    return std::sqrt(sum / static_cast<double>(entries.size()));
}

void gram_schmidt(ColMatrix& q) {
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index p = 0; p < j; ++p) q.col(j) -= q.col(p).dot(q.col(j)) * q.col(p);
        }
        const double norm = q.col(j).norm();
        if (norm > 0.0) q.col(j) /= norm;
    }
}

}  // namespace

void IncSvdConfig::validate() const {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "incremental SVD needs k >= 1");
    if (!(learning_rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "learning_rate must be > 0");
    if (!(regularization >= 0.0)) throw Error(ErrorKind::InvalidArgument, "regularization must be >= 0");
    if (max_epochs < 1) throw Error(ErrorKind::InvalidArgument, "max_epochs must be >= 1");
    if (!(convergence_tol >= 0.0)) throw Error(ErrorKind::InvalidArgument, "convergence_tol must be >= 0");
}

IncSvdResult estimate_singular_vectors(const ObservedMatrix& m, const IncSvdConfig& cfg,
                                       std::uint64_t seed) {
    cfg.validate();
    if (m.empty()) throw Error(ErrorKind::EmptyObservation, "no observed entries");
    if (cfg.k > std::min(m.rows(), m.cols())) {
        throw Error(ErrorKind::InvalidRank, "k exceeds min(n_rows, n_cols)");
    }

    IncSvdResult result;
    if (m.size() < cfg.k * (m.rows() + m.cols())) {
        result.warning = "only " + std::to_string(m.size()) + " observed entries for " +
                         std::to_string(cfg.k) + " features; estimates may be unreliable";
    }

    const auto& entries = m.entries();
    double mean_sq = 0.0;
    for (const Entry& e : entries) mean_sq += e.value * e.value;
    mean_sq /= static_cast<double>(entries.size());
    const double scale = mean_sq > 0.0 ? std::sqrt(mean_sq) : 1.0;

    std::vector<double> residual(entries.size());
    for (std::size_t e = 0; e < entries.size(); ++e) residual[e] = entries[e].value / scale;

    const auto n = static_cast<Eigen::Index>(m.rows());
    const auto cols = static_cast<Eigen::Index>(m.cols());
    const auto k = static_cast<Eigen::Index>(cfg.k);
    ColMatrix left(n, k);
    ColMatrix right(cols, k);
    Vector scales(k);

    Rng rng(seed);
    std::uniform_real_distribution<double> jitter(-kInitNoise, kInitNoise);
    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (Eigen::Index f = 0; f < k; ++f) {
        Vector u(n), v(cols);
        for (Eigen::Index i = 0; i < n; ++i) u(i) = kInitValue + jitter(rng);
        for (Eigen::Index j = 0; j < cols; ++j) v(j) = kInitValue + jitter(rng);

        double rate = cfg.learning_rate;
        int backoffs = 0;
        std::vector<double> history{rmse_of(entries, residual, u, v)};
        int epoch = 0;
        bool settled = false;
        while (epoch < cfg.max_epochs) {
            const Vector u_prev = u;
            const Vector v_prev = v;
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t e : order) {
                const auto i = static_cast<Eigen::Index>(entries[e].row);
                const auto j = static_cast<Eigen::Index>(entries[e].col);
                const double err = residual[e] - u(i) * v(j);
                const double ui = u(i);
                u(i) += rate * (err * v(j) - cfg.regularization * ui);
                v(j) += rate * (err * ui - cfg.regularization * v(j));
            }
            const double current = std::isfinite(u.sum() + v.sum())
                                       ? rmse_of(entries, residual, u, v)
                                       : std::numeric_limits<double>::infinity();
            if (!(current <= history.back() + kRmseSlack)) {
                u = u_prev;
                v = v_prev;
                rate *= 0.5;
                if (++backoffs > kMaxBackoffs) {
                    throw Error(ErrorKind::NonMonotone,
                                "training RMSE kept rising for feature " + std::to_string(f));
                }
                continue;
            }
            ++epoch;
            backoffs = 0;
            rate *= kRateGrowth;
            history.push_back(current);
            const double previous = history[history.size() > kWindow ? history.size() - 1 - kWindow : 0];
            if (history.size() > kWindow && previous > 0.0 &&
                (previous - current) / previous < cfg.convergence_tol) {
                settled = true;
                break;
            }
            if (current == 0.0) {
                settled = true;
                break;
            }
        }

        for (std::size_t e = 0; e < entries.size(); ++e) {
            residual[e] -= u(static_cast<Eigen::Index>(entries[e].row)) *
                           v(static_cast<Eigen::Index>(entries[e].col));
        }
        scales(f) = u.norm() * v.norm() * scale;
        left.col(f) = u;
        right.col(f) = v;
        result.converged = result.converged && settled;
        result.epochs.push_back(epoch);
        result.rmse.push_back(std::move(history));
    }

    std::vector<Eigen::Index> rank(static_cast<std::size_t>(k));
    std::iota(rank.begin(), rank.end(), Eigen::Index{0});
    std::stable_sort(rank.begin(), rank.end(), [&](auto a, auto b) { return scales(a) > scales(b); });
    SingularBasis& basis = result.basis;
    basis.left.resize(n, k);
    basis.right.resize(cols, k);
    basis.values.resize(k);
    for (Eigen::Index c = 0; c < k; ++c) {
        basis.left.col(c) = left.col(rank[static_cast<std::size_t>(c)]);
        basis.right.col(c) = right.col(rank[static_cast<std::size_t>(c)]);
        basis.values(c) = scales(rank[static_cast<std::size_t>(c)]);
    }
    gram_schmidt(basis.left);
    gram_schmidt(basis.right);
    for (Eigen::Index c = 0; c < k; ++c) {
        Eigen::Index arg = 0;
        basis.right.col(c).cwiseAbs().maxCoeff(&arg);
        if (basis.right(arg, c) < 0.0) {
            basis.right.col(c) *= -1.0;
            basis.left.col(c) *= -1.0;
        }
    }
    return result;
}

}  // namespace targeted
