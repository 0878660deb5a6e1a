#include "targeted/linalg.hpp"

#include "targeted/rng.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace targeted {

namespace {

constexpr std::uint64_t kSvdStartSeed = 0x5eed5eedULL;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Modified Gram-Schmidt, applied twice. Columns that collapse are replaced
// by fresh random directions so the block keeps full column rank.
void orthonormalize(ColMatrix& q, Rng& rng) {
    std::normal_distribution<double> normal;
    const Eigen::Index cols = q.cols();
    for (Eigen::Index j = 0; j < cols; ++j) {
        const double original = q.col(j).norm();
        for (int attempt = 0; attempt < 8; ++attempt) {
            for (int pass = 0; pass < 2; ++pass) {
                for (Eigen::Index p = 0; p < j; ++p) {
                    q.col(j) -= q.col(p).dot(q.col(j)) * q.col(p);
                }
            }
            const double norm = q.col(j).norm();
            if (norm > 1e-12 * std::max(original, 1.0) && norm > 0.0) {
                q.col(j) /= norm;
                break;
            }
            for (Eigen::Index i = 0; i < q.rows(); ++i) q(i, j) = normal(rng);
        }
    }
}

void orient(SingularBasis& basis) {
    for (Eigen::Index c = 0; c < basis.right.cols(); ++c) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < basis.right.rows(); ++i) {
            if (std::abs(basis.right(i, c)) > best) {
                best = std::abs(basis.right(i, c));
                arg = i;
            }
        }
        if (basis.right(arg, c) < 0.0) {
            basis.right.col(c) *= -1.0;
            basis.left.col(c) *= -1.0;
        }
    }
}

}  // namespace

DenseMatrix::DenseMatrix(Matrix values) : values_(std::move(values)) {
    if (!values_.allFinite()) {
        throw Error(ErrorKind::InvalidArgument, "matrix contains non-finite entries");
    }
}

DenseMatrix DenseMatrix::zeros(std::size_t rows, std::size_t cols) {
    return DenseMatrix(Matrix::Zero(idx(rows), idx(cols)));
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    const std::size_t m = n == 0 ? 0 : rows.front().size();
    Matrix values(idx(n), idx(m));
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != m) {
            throw Error(ErrorKind::DimensionMismatch, "ragged row " + std::to_string(i));
        }
        for (std::size_t j = 0; j < m; ++j) values(idx(i), idx(j)) = rows[i][j];
    }
    return DenseMatrix(std::move(values));
}

DenseMatrix DenseMatrix::transposed() const { return DenseMatrix(Matrix(values_.transpose())); }

DenseMatrix DenseMatrix::select(std::span<const std::size_t> rows,
                                std::span<const std::size_t> cols) const {
    Matrix out(idx(rows.size()), idx(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < cols.size(); ++b) {
            out(idx(a), idx(b)) = values_(idx(rows[a]), idx(cols[b]));
        }
    }
    return DenseMatrix(std::move(out));
}

SvdNoConvergence::SvdNoConvergence(SvdOutcome best)
    : Error(ErrorKind::NoConvergence,
            "truncated SVD stopped after " + std::to_string(best.iterations) +
                " iterations with relative residual " + std::to_string(best.residual)),
      best_(std::move(best)) {}

SvdOutcome partial_svd(const Matrix& a, std::size_t k, double tol, int max_iter) {
    const std::size_t n = static_cast<std::size_t>(a.rows());
    const std::size_t m = static_cast<std::size_t>(a.cols());
    const std::size_t dim = std::min(n, m);
    if (k < 1 || k > dim) {
        throw Error(ErrorKind::InvalidRank, "k = " + std::to_string(k) + " outside [1, " +
                                                std::to_string(dim) + "]");
    }
    if (a.squaredNorm() == 0.0) throw Error(ErrorKind::ZeroMatrix, "matrix has zero norm");

    // Oversampled block speeds up convergence of the trailing requested triple.
    const std::size_t block = std::min(dim, std::max(2 * k, k + 8));
    const Eigen::Index kb = idx(k);

    Rng rng(kSvdStartSeed);
    std::normal_distribution<double> normal;
    ColMatrix v(idx(m), idx(block));
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, j) = normal(rng);
    }
    orthonormalize(v, rng);

    SvdOutcome out;
    out.residual = std::numeric_limits<double>::infinity();
    ColMatrix u_ritz;
    Vector sigma;
    for (int it = 1; it <= max_iter + 1; ++it) {
        ColMatrix av = a * v;
        if (it > 1) {
            double worst = 0.0;
            for (Eigen::Index c = 0; c < kb; ++c) {
                worst = std::max(worst, (av.col(c) - sigma(c) * u_ritz.col(c)).norm());
            }
            const double rel = worst / sigma(0);
            out.iterations = it - 1;
            out.residual = rel;
            if (rel <= tol) {
                out.converged = true;
                break;
            }
            if (it == max_iter + 1) break;
        }
        orthonormalize(av, rng);
        const ColMatrix projected = a.transpose() * av;
        // W = Q R, so U^T A = R^T Q^T and the Ritz triples come from the small R^T.
        ColMatrix w = projected;
        orthonormalize(w, rng);
        const ColMatrix r = w.transpose() * projected;
        Eigen::JacobiSVD<ColMatrix> small(r.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
        u_ritz = av * small.matrixU();
        v = w * small.matrixV();
        sigma = small.singularValues();
    }

    out.basis.left = u_ritz.leftCols(kb);
    out.basis.right = v.leftCols(kb);
    out.basis.values = sigma.head(kb);
    orient(out.basis);
    return out;
}

SingularBasis truncated_svd(const DenseMatrix& a, std::size_t k, double tol, int max_iter) {
    SvdOutcome out = partial_svd(a.values(), k, tol, max_iter);
    if (!out.converged) throw SvdNoConvergence(std::move(out));
    return std::move(out.basis);
}

double spectral_norm(const Matrix& a) {
    if (a.size() == 0) throw Error(ErrorKind::InvalidArgument, "spectral norm of empty matrix");
    if (a.squaredNorm() == 0.0) return 0.0;
    if (a.rows() == 1 || a.cols() == 1) return a.norm();
    return partial_svd(a, 1, 1e-11, 5000).basis.values(0);
}

double spectral_norm(const DenseMatrix& a) { return spectral_norm(a.values()); }

double frobenius_norm(const DenseMatrix& a) { return a.values().norm(); }

std::size_t numerical_rank(const Matrix& a, std::size_t limit) {
    if (a.size() == 0 || a.squaredNorm() == 0.0) return 0;
    const std::size_t dim = static_cast<std::size_t>(std::min(a.rows(), a.cols()));
    const std::size_t k = std::min(dim, limit + 1);
    const Vector s = partial_svd(a, k, 1e-10, 3000).basis.values;
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > kNumericRankCutoff * s(0)) ++count;
    }
    return count;
}

Matrix normalize_rows(const Matrix& a) {
    Matrix out = a;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double norm = out.row(i).norm();
        if (norm > 0.0) out.row(i) /= norm;
    }
    return out;
}

DenseMatrix normalize_rows(const DenseMatrix& a) { return DenseMatrix(normalize_rows(a.values())); }

DenseMatrix low_rank_gaussian(std::size_t n, std::size_t m, std::size_t r, std::uint64_t seed) {
    if (r > std::min(n, m)) {
        throw Error(ErrorKind::InvalidRank, "rank " + std::to_string(r) + " exceeds min(" +
                                                std::to_string(n) + ", " + std::to_string(m) + ")");
    }
    Rng rng(seed);
    std::normal_distribution<double> normal;
    Matrix left(idx(n), idx(r));
    Matrix right(idx(m), idx(r));
    for (Eigen::Index i = 0; i < left.size(); ++i) left.data()[i] = normal(rng);
    for (Eigen::Index i = 0; i < right.size(); ++i) right.data()[i] = normal(rng);
    return DenseMatrix(Matrix(left * right.transpose()));
}

void write_csv(std::ostream& out, const DenseMatrix& a) {
    std::array<char, 32> buf{};
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (j > 0) out << ',';
            auto res = std::to_chars(buf.data(), buf.data() + buf.size(), a(i, j));
            out.write(buf.data(), res.ptr - buf.data());
        }
        out << '\n';
    }
}

DenseMatrix read_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p <= end) {
            while (p < end && *p == ' ') ++p;
            double value = 0.0;
            auto res = std::from_chars(p, end, value);
            if (res.ec != std::errc()) {
                throw Error(ErrorKind::ParseError, "bad number on CSV line " + std::to_string(line_no));
            }
            row.push_back(value);
            p = res.ptr;
            while (p < end && *p == ' ') ++p;
            if (p == end) break;
            if (*p != ',') {
                throw Error(ErrorKind::ParseError, "expected ',' on CSV line " + std::to_string(line_no));
            }
            ++p;
        }
        rows.push_back(std::move(row));
    }
    return DenseMatrix::from_rows(rows);
}

void save_csv(const std::filesystem::path& path, const DenseMatrix& a) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    write_csv(out, a);
}

DenseMatrix load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
    return read_csv(in);
}

}  // namespace targeted
