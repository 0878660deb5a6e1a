#pragma once

// Reference full SVD for tests: one-sided Jacobi (Hestenes) on plain
// std::vector storage. Slow, simple, and independent of the library's
// block power iteration and of Eigen's decompositions.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace oracle {

struct FullSvd {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;                 // non-increasing, length min(rows, cols)
    std::vector<std::vector<double>> right;     // right[i] = i-th right singular vector (length cols)
    std::vector<std::vector<double>> left;      // left[i] = i-th left singular vector (length rows)
};

// `a` is row-major rows x cols.
inline FullSvd jacobi_svd(const std::vector<double>& a, std::size_t rows, std::size_t cols) {
    const bool flip = rows < cols;
    const std::size_t n = flip ? cols : rows;  // tall working matrix n x p
    const std::size_t p = flip ? rows : cols;
    std::vector<std::vector<double>> w(p, std::vector<double>(n));  // column storage
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            if (flip) {
                w[i][j] = a[i * cols + j];
            } else {
                w[j][i] = a[i * cols + j];
            }
        }
    }
    std::vector<std::vector<double>> v(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < p; ++i) v[i][i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i + 1 < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    alpha += w[i][k] * w[i][k];
                    beta += w[j][k] * w[j][k];
                    gamma += w[i][k] * w[j][k];
                }
                if (gamma == 0.0) continue;
                const double scale = std::sqrt(alpha * beta);
                if (scale == 0.0) continue;
                off = std::max(off, std::abs(gamma) / scale);
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t k = 0; k < n; ++k) {
                    const double wi = w[i][k];
                    const double wj = w[j][k];
                    w[i][k] = c * wi - s * wj;
                    w[j][k] = s * wi + c * wj;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double vi = v[i][k];
                    const double vj = v[j][k];
                    v[i][k] = c * vi - s * vj;
                    v[j][k] = s * vi + c * vj;
                }
            }
        }
        if (off < 1e-15) break;
    }

    std::vector<double> sigma(p);
    for (std::size_t i = 0; i < p; ++i) {
        sigma[i] = std::sqrt(std::inner_product(w[i].begin(), w[i].end(), w[i].begin(), 0.0));
    }
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return sigma[x] > sigma[y]; });

    FullSvd out;
    out.rows = rows;
    out.cols = cols;
    for (std::size_t o : order) {
        out.values.push_back(sigma[o]);
        std::vector<double> tall = w[o];
        if (sigma[o] > 0) {
            for (double& x : tall) x /= sigma[o];
        }
        // tall: left vector of the working matrix; v[o]: right vector.
        if (flip) {
            out.right.push_back(tall);
            out.left.push_back(v[o]);
        } else {
            out.left.push_back(tall);
            out.right.push_back(v[o]);
        }
    }
    return out;
}

}  // namespace oracle
