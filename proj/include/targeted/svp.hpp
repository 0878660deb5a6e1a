#pragma once

#include "targeted/incremental_svd.hpp"
#include "targeted/linalg.hpp"
#include "targeted/observed.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace targeted {

/// p_i in [0, 1]: how strongly normalized row i lines up with the basis.
struct ProjectionVector {
    std::vector<double> values;
};

struct RowPartition {
    std::vector<std::size_t> high;  // cluster with the larger mean
    std::vector<std::size_t> low;
};

struct RowSplit {
    std::vector<std::size_t> s_rows;
    std::vector<std::size_t> t_rows;
};

/// pi = ||S||^2 / ||T||^2, gamma = max_j |<s_1, t_j>|, and the projection gaps
/// between the candidate and the rest, measured on rows and on columns.
struct SeparationReport {
    double pi = 0.0;
    double gamma = 0.0;
    double delta_rows = 0.0;
    double delta_cols = 0.0;
};

enum class Estimator {
    Auto,         // exact when fully observed, otherwise incremental
    Exact,        // truncated SVD; needs every entry observed
    Incremental,  // SGD on observed entries only
    ZeroFill,     // truncated SVD of the zero-filled matrix
};

Estimator parse_estimator(std::string_view name);
std::string_view estimator_name(Estimator e) noexcept;

struct SvpConfig {
    std::size_t n_vectors = 3;
    double delta_threshold = 0.2;
    std::optional<std::size_t> max_submatrices;  // unbounded when empty
    Estimator estimator = Estimator::Auto;
    IncSvdConfig incremental{};  // k is overridden by n_vectors
    std::uint64_t seed = 42;

    void validate() const;
};

struct Discovery {
    SubmatrixDescriptor descriptor;
    SeparationReport report;
};

/// p_i = || (|<v_d, N(A_i)>|)_{d=1..k} ||_2 / sqrt(k) over the columns of
/// `right` (one basis vector per column). Zero rows get 0.
ProjectionVector project(const Matrix& a, const ColMatrix& right);
ProjectionVector project(const DenseMatrix& a, const SingularBasis& basis);

/// Optimal 1-D two-means split by scanning every cut of the sorted values.
/// Throws DegeneratePartition when all values coincide.
RowPartition partition_projections(const ProjectionVector& p);

/// Mean |<v_1, N(row)>| over s_rows minus the same mean over t_rows.
double delta_gap(const DenseMatrix& m, const RowSplit& split, const SingularBasis& basis);

/// pi from S = M(R_s, C_s) and T = M(R_s', C_s'); gamma from the row blocks
/// M(R_s, :) and M(R_s', :); deltas from M's own first singular vector.
SeparationReport separation_params(const DenseMatrix& m, const SubmatrixDescriptor& d);

/// One pass of SVP on rows and on columns. Throws NoSubmatrixFound when either
/// side carries no split.
Discovery svp_discover(const ObservedMatrix& m, const SvpConfig& cfg);

/// Repeats svp_discover on the rows/columns left over after each accepted
/// submatrix, while both projection gaps exceed cfg.delta_threshold.
std::vector<Discovery> discover_all(const ObservedMatrix& m, const SvpConfig& cfg);

}  // namespace targeted
