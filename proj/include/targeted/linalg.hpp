#pragma once

#include "targeted/errors.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace targeted {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Fully known real matrix. Entries are finite; the value is immutable once
/// built, so copies can be shared freely between threads.
class DenseMatrix {
public:
    DenseMatrix() = default;
    /// Throws InvalidArgument if any entry is NaN or infinite.
    explicit DenseMatrix(Matrix values);

    static DenseMatrix zeros(std::size_t rows, std::size_t cols);
    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    bool empty() const noexcept { return values_.size() == 0; }

    double operator()(std::size_t i, std::size_t j) const {
        return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const Matrix& values() const noexcept { return values_; }

    DenseMatrix transposed() const;
    /// Gathers M(rows, cols) in the given index order.
    DenseMatrix select(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const;

    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
        return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
               a.values_ == b.values_;
    }

private:
    Matrix values_;
};

/// Top-k singular triples. Column i of `left`/`right` pairs with `values[i]`;
/// values are non-increasing and each right vector has its largest-magnitude
/// entry positive.
struct SingularBasis {
    ColMatrix left;
    Vector values;
    ColMatrix right;

    std::size_t k() const noexcept { return static_cast<std::size_t>(values.size()); }
};

struct SvdOutcome {
    SingularBasis basis;
    bool converged = false;
    int iterations = 0;
    /// max_i ||A v_i - s_i u_i|| / s_1 over the returned triples.
    double residual = 0.0;
};

/// Thrown by truncated_svd when max_iter runs out; carries the best iterate.
class SvdNoConvergence : public Error {
public:
    explicit SvdNoConvergence(SvdOutcome best);
    const SvdOutcome& best() const noexcept { return best_; }

private:
    SvdOutcome best_;
};

inline constexpr double kSvdTol = 1e-8;
inline constexpr int kSvdMaxIter = 1000;
inline constexpr double kNumericRankCutoff = 1e-8;

/// Block power iteration with Rayleigh-Ritz extraction. Never throws on
/// non-convergence; inspect `converged`.
SvdOutcome partial_svd(const Matrix& a, std::size_t k, double tol = kSvdTol,
                       int max_iter = kSvdMaxIter);

/// Top-k singular triples with ||A v - s u|| <= tol * s_1 for each triple.
SingularBasis truncated_svd(const DenseMatrix& a, std::size_t k, double tol = kSvdTol,
                            int max_iter = kSvdMaxIter);

double spectral_norm(const DenseMatrix& a);
double spectral_norm(const Matrix& a);
double frobenius_norm(const DenseMatrix& a);

/// Number of singular values above kNumericRankCutoff * s_1, counting at most
/// `limit + 1` of them (pass the dimension to get the exact rank).
std::size_t numerical_rank(const Matrix& a, std::size_t limit);

DenseMatrix normalize_rows(const DenseMatrix& a);
Matrix normalize_rows(const Matrix& a);

/// A * B^T with A (n x r) and B (m x r) filled with i.i.d. N(0, 1) draws.
DenseMatrix low_rank_gaussian(std::size_t n, std::size_t m, std::size_t r, std::uint64_t seed);

void write_csv(std::ostream& out, const DenseMatrix& a);
DenseMatrix read_csv(std::istream& in);
void save_csv(const std::filesystem::path& path, const DenseMatrix& a);
DenseMatrix load_csv(const std::filesystem::path& path);

}  // namespace targeted
