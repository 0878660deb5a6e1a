#pragma once

#include "targeted/linalg.hpp"
#include "targeted/observed.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace targeted {

/// Stochastic-gradient settings for the incremental (Funk-style) SVD.
/// Hyperparameters apply to the data after it is rescaled to unit RMS.
struct IncSvdConfig {
    std::size_t k = 1;
    double learning_rate = 0.01;
    double regularization = 0.02;
    int max_epochs = 200;  // per feature
    double convergence_tol = 1e-4;

    void validate() const;
};

struct IncSvdResult {
    SingularBasis basis;
    /// False if any feature ran out of epochs before the RMSE settled.
    bool converged = true;
    std::vector<int> epochs;                     // per feature
    std::vector<std::vector<double>> rmse;       // per feature, one value per accepted epoch
    std::string warning;                         // set when |Omega| < k (n + m)
};

/// Fits k rank-one features one after another on the observed entries, each
/// on the residual left by the previous ones, then orthonormalizes the
/// factor columns. Deterministic for a given seed.
///
/// An epoch that raises the training RMSE is rolled back and retried with
/// half the step size, so the per-feature RMSE sequence is non-increasing.
IncSvdResult estimate_singular_vectors(const ObservedMatrix& m, const IncSvdConfig& cfg,
                                       std::uint64_t seed);

}  // namespace targeted
