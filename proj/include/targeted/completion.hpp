#pragma once

#include "targeted/linalg.hpp"
#include "targeted/observed.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace targeted {

struct CompletionConfig {
    std::optional<std::size_t> rank;  // empty = estimate from the spectrum gap
    std::size_t max_rank = 50;        // clamped to min(n_rows, n_cols) per call
    double tol = 1e-5;                // stop when the relative Omega residual improves by less
    int max_iter = 500;

    void validate() const;
};

struct CompletionOutput {
    DenseMatrix estimate;
    std::size_t used_rank = 0;
    int iterations = 0;
    /// ||P_Omega(estimate - M)||_F / ||M_Omega||_F after the last sweep.
    double final_residual = 0.0;
    std::vector<double> residual_history;  // one value per sweep
    /// Rows/columns without a single observation; their estimates are unsupported.
    std::size_t unobserved_rows = 0;
    std::size_t unobserved_cols = 0;
};

/// Index of the largest ratio s_i / s_{i+1} among the leading singular values
/// of the zero-filled matrix rescaled by 1 / density. Never below 1.
std::size_t estimate_rank(const ObservedMatrix& m, std::size_t max_rank);

/// Alternating ridge least squares on X Y^T over the observed cells.
CompletionOutput complete(const ObservedMatrix& m, const CompletionConfig& cfg, std::uint64_t seed);

}  // namespace targeted
