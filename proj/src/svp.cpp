#include "targeted/svp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace targeted {

namespace {

constexpr std::size_t kGammaVectorCap = 10;
constexpr double kDiagnosticTol = 1e-7;
constexpr int kDiagnosticMaxIter = 500;
constexpr double kEqualProjection = 1e-12;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

Matrix gather(const Matrix& m, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
    Matrix out(idx(rows.size()), idx(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < cols.size(); ++b) out(idx(a), idx(b)) = m(idx(rows[a]), idx(cols[b]));
    }
    return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

double mean_over(const std::vector<double>& p, const std::vector<std::size_t>& ids) {
    double sum = 0.0;
    for (auto i : ids) sum += p[i];
    return sum / static_cast<double>(ids.size());
}

double top_singular_value(const Matrix& a) {
    if (a.size() == 0 || a.squaredNorm() == 0.0) return 0.0;
    return spectral_norm(a);
}

void fill_pi_gamma(const Matrix& m, const SubmatrixDescriptor& d, SeparationReport& report) {
    const auto rest_rows = complement(d.rows, static_cast<std::size_t>(m.rows()));
    const auto rest_cols = complement(d.cols, static_cast<std::size_t>(m.cols()));
    if (rest_rows.empty() || rest_cols.empty()) {
        throw Error(ErrorKind::EmptyComplement, "descriptor leaves no complement block");
    }
    const double s_norm = top_singular_value(gather(m, d.rows, d.cols));
    const double t_norm = top_singular_value(gather(m, rest_rows, rest_cols));
    report.pi = t_norm > 0.0 ? (s_norm * s_norm) / (t_norm * t_norm) : std::numeric_limits<double>::infinity();

    const auto cols = all_indices(static_cast<std::size_t>(m.cols()));
    const Matrix s_block = gather(m, d.rows, cols);
    const Matrix t_block = gather(m, rest_rows, cols);
    report.gamma = 0.0;
    if (s_block.squaredNorm() == 0.0 || t_block.squaredNorm() == 0.0) return;
    const Vector s1 = partial_svd(s_block, 1, kDiagnosticTol, kDiagnosticMaxIter).basis.right.col(0);
    const std::size_t dim = static_cast<std::size_t>(std::min(t_block.rows(), t_block.cols()));
    const SingularBasis t = partial_svd(t_block, std::min(dim, kGammaVectorCap), kDiagnosticTol,
                                        kDiagnosticMaxIter).basis;
    for (Eigen::Index j = 0; j < t.values.size(); ++j) {
        if (t.values(j) <= kNumericRankCutoff * t.values(0)) break;
        report.gamma = std::max(report.gamma, std::abs(s1.dot(t.right.col(j))));
    }
    report.gamma = std::min(report.gamma, 1.0);
}

// Left and right estimates of the leading singular vectors per the estimator.
SingularBasis estimate_basis(const ObservedMatrix& m, const Matrix& dense, const SvpConfig& cfg,
                             std::size_t k) {
    Estimator estimator = cfg.estimator;
    if (estimator == Estimator::Auto) {
        estimator = m.fully_observed() ? Estimator::Exact : Estimator::Incremental;
    }
    switch (estimator) {
        case Estimator::Exact:
            if (!m.fully_observed()) {
                throw Error(ErrorKind::InvalidArgument, "exact estimator needs a fully observed matrix");
            }
            [[fallthrough]];
        case Estimator::ZeroFill:
            if (dense.squaredNorm() == 0.0) {
                throw Error(ErrorKind::NoSubmatrixFound, "matrix is identically zero");
            }
            // The best iterate is still a usable direction if the tolerance was not met.
            return partial_svd(dense, k).basis;
        case Estimator::Incremental:
        case Estimator::Auto: {
            IncSvdConfig inc = cfg.incremental;
            inc.k = k;
            return estimate_singular_vectors(m, inc, cfg.seed).basis;
        }
    }
    return {};
}

}  // namespace

Estimator parse_estimator(std::string_view name) {
    if (name == "auto") return Estimator::Auto;
    if (name == "exact") return Estimator::Exact;
    if (name == "incremental") return Estimator::Incremental;
    if (name == "zerofill") return Estimator::ZeroFill;
    throw Error(ErrorKind::InvalidArgument, "unknown estimator '" + std::string(name) + "'");
}

std::string_view estimator_name(Estimator e) noexcept {
    switch (e) {
        case Estimator::Auto: return "auto";
        case Estimator::Exact: return "exact";
        case Estimator::Incremental: return "incremental";
        case Estimator::ZeroFill: return "zerofill";
    }
    return "auto";
}

void SvpConfig::validate() const {
    if (n_vectors < 1) throw Error(ErrorKind::InvalidArgument, "n_vectors must be >= 1");
    if (!(delta_threshold >= 0.0)) throw Error(ErrorKind::InvalidArgument, "delta_threshold must be >= 0");
}

ProjectionVector project(const Matrix& a, const ColMatrix& right) {
    if (right.rows() != a.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "basis length " + std::to_string(right.rows()) +
                                                      " != column count " + std::to_string(a.cols()));
    }
    if (right.cols() < 1) throw Error(ErrorKind::InvalidArgument, "empty basis");
    const ColMatrix coords = a * right;
    const double norm_k = std::sqrt(static_cast<double>(right.cols()));
    ProjectionVector p;
    p.values.resize(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double row_norm = a.row(i).norm();
        double value = 0.0;
        if (row_norm > 0.0) value = coords.row(i).norm() / row_norm / norm_k;
        p.values[static_cast<std::size_t>(i)] = std::min(value, 1.0);
    }
    return p;
}

ProjectionVector project(const DenseMatrix& a, const SingularBasis& basis) {
    return project(a.values(), basis.right);
}

RowPartition partition_projections(const ProjectionVector& p) {
    const std::size_t n = p.values.size();
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "empty projection vector");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return p.values[a] > p.values[b]; });
    const double top = p.values[order.front()];
    const double bottom = p.values[order.back()];
    if (top - bottom <= kEqualProjection) {
        throw Error(ErrorKind::DegeneratePartition, "all projections are equal");
    }

    // Centered prefix sums keep the WCSS arithmetic well conditioned.
    const double center = std::accumulate(p.values.begin(), p.values.end(), 0.0) / static_cast<double>(n);
    std::vector<double> sum(n + 1, 0.0), sq(n + 1, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        const double x = p.values[order[a]] - center;
        sum[a + 1] = sum[a] + x;
        sq[a + 1] = sq[a] + x * x;
    }
    auto wcss = [&](std::size_t from, std::size_t to) {
        const double count = static_cast<double>(to - from);
        const double s = sum[to] - sum[from];
        return std::max(0.0, (sq[to] - sq[from]) - s * s / count);
    };
    const double scale = sq[n] > 0.0 ? sq[n] : 1.0;
    std::size_t best_cut = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t cut = 1; cut < n; ++cut) {
        // Equal values always land in the same cluster.
        if (p.values[order[cut - 1]] - p.values[order[cut]] <= kEqualProjection) continue;
        const double cost = wcss(0, cut) + wcss(cut, n);
        // Scanning grows the high cluster, so a strict improvement is needed to
        // move past an earlier tie: ties go to the smaller high cluster.
        if (cost < best - 1e-12 * scale) {
            best = cost;
            best_cut = cut;
        }
    }
    RowPartition part;
    part.high.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best_cut));
    part.low.assign(order.begin() + static_cast<std::ptrdiff_t>(best_cut), order.end());
    std::sort(part.high.begin(), part.high.end());
    std::sort(part.low.begin(), part.low.end());
    return part;
}

double delta_gap(const DenseMatrix& m, const RowSplit& split, const SingularBasis& basis) {
    if (split.s_rows.empty() || split.t_rows.empty()) {
        throw Error(ErrorKind::EmptySplit, "both sides of the row split must be non-empty");
    }
    if (basis.k() < 1) throw Error(ErrorKind::InvalidArgument, "empty basis");
    std::vector<std::size_t> seen(split.s_rows);
    seen.insert(seen.end(), split.t_rows.begin(), split.t_rows.end());
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end() || seen.size() != m.rows() ||
        seen.back() >= m.rows()) {
        throw Error(ErrorKind::InvalidArgument, "row split must partition the rows");
    }
    const ProjectionVector p = project(m.values(), basis.right.leftCols(1));
    return mean_over(p.values, split.s_rows) - mean_over(p.values, split.t_rows);
}

SeparationReport separation_params(const DenseMatrix& m, const SubmatrixDescriptor& d) {
    d.validate(m.rows(), m.cols());
    SeparationReport report;
    fill_pi_gamma(m.values(), d, report);
    if (m.values().squaredNorm() == 0.0) return report;
    const SingularBasis basis = partial_svd(m.values(), 1).basis;
    report.delta_rows = delta_gap(m, {d.rows, complement(d.rows, m.rows())}, basis);
    SingularBasis flipped;
    flipped.right = basis.left;
    flipped.left = basis.right;
    flipped.values = basis.values;
    report.delta_cols = delta_gap(m.transposed(), {d.cols, complement(d.cols, m.cols())}, flipped);
    return report;
}

Discovery svp_discover(const ObservedMatrix& m, const SvpConfig& cfg) {
    cfg.validate();
    if (m.empty()) throw Error(ErrorKind::NoSubmatrixFound, "no observed entries");
    if (m.rows() < 2 || m.cols() < 2) {
        throw Error(ErrorKind::NoSubmatrixFound, "matrix too small to split");
    }
    const Matrix dense = fill_zeros(m).values();
    const std::size_t k = std::min({cfg.n_vectors, m.rows(), m.cols()});
    const SingularBasis basis = estimate_basis(m, dense, cfg, k);

    ProjectionVector row_p = project(dense, basis.right);
    ProjectionVector col_p = project(Matrix(dense.transpose()), basis.left);
    RowPartition rows, cols;
    try {
        rows = partition_projections(row_p);
        cols = partition_projections(col_p);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::DegeneratePartition) {
            throw Error(ErrorKind::NoSubmatrixFound, "projections carry no split");
        }
        throw;
    }

    Discovery found;
    found.descriptor = SubmatrixDescriptor::make(rows.high, cols.high);
    const ProjectionVector row_v1 = project(dense, basis.right.leftCols(1));
    const ProjectionVector col_v1 = project(Matrix(dense.transpose()), basis.left.leftCols(1));
    found.report.delta_rows = mean_over(row_v1.values, rows.high) - mean_over(row_v1.values, rows.low);
    found.report.delta_cols = mean_over(col_v1.values, cols.high) - mean_over(col_v1.values, cols.low);
    fill_pi_gamma(dense, found.descriptor, found.report);
    return found;
}

std::vector<Discovery> discover_all(const ObservedMatrix& m, const SvpConfig& cfg) {
    cfg.validate();
    std::vector<Discovery> found;
    std::vector<std::size_t> global_rows = all_indices(m.rows());
    std::vector<std::size_t> global_cols = all_indices(m.cols());
    ObservedMatrix current = m;
    SvpConfig round_cfg = cfg;
    while (!cfg.max_submatrices || found.size() < *cfg.max_submatrices) {
        if (current.rows() < 2 || current.cols() < 2 || current.empty()) break;
        round_cfg.seed = cfg.seed + found.size();
        Discovery local;
        try {
            local = svp_discover(current, round_cfg);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::NoSubmatrixFound) break;
            throw;
        }
        if (!(local.report.delta_rows > cfg.delta_threshold && local.report.delta_cols > cfg.delta_threshold)) {
            break;
        }
        Discovery global = local;
        for (auto& r : global.descriptor.rows) r = global_rows[r];
        for (auto& c : global.descriptor.cols) c = global_cols[c];
        found.push_back(std::move(global));

        const auto keep_rows = complement(local.descriptor.rows, current.rows());
        const auto keep_cols = complement(local.descriptor.cols, current.cols());
        if (keep_rows.empty() || keep_cols.empty()) break;
        current = restrict(current, SubmatrixDescriptor{keep_rows, keep_cols});
        std::vector<std::size_t> next_rows, next_cols;
        for (auto r : keep_rows) next_rows.push_back(global_rows[r]);
        for (auto c : keep_cols) next_cols.push_back(global_cols[c]);
        global_rows = std::move(next_rows);
        global_cols = std::move(next_cols);
    }
    return found;
}

}  // namespace targeted
