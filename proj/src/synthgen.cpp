#include "targeted/synthgen.hpp"

#include "targeted/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

namespace targeted {

namespace {

constexpr std::uint64_t kPlacementStream = 1000;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

template <typename T>
T field(std::string_view text, std::string_view what) {
    T value{};
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw Error(ErrorKind::ParseError, "bad plant " + std::string(what) + " '" + std::string(text) + "'");
    }
    return value;
}

Matrix gather(const Matrix& m, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
    Matrix out(idx(rows.size()), idx(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < cols.size(); ++b) out(idx(a), idx(b)) = m(idx(rows[a]), idx(cols[b]));
    }
    return out;
}

// Rows/cols of the complement of plant `index` after removing plants before it.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> nested_complement(
    std::size_t n, std::size_t m, const std::vector<SubmatrixDescriptor>& truth, std::size_t index) {
    std::vector<bool> drop_row(n, false), drop_col(m, false);
    for (std::size_t q = 0; q <= index; ++q) {
        for (auto r : truth[q].rows) drop_row[r] = true;
        for (auto c : truth[q].cols) drop_col[c] = true;
    }
    std::vector<std::size_t> rows, cols;
    for (std::size_t i = 0; i < n; ++i) {
        if (!drop_row[i]) rows.push_back(i);
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (!drop_col[j]) cols.push_back(j);
    }
    return {rows, cols};
}

std::vector<std::size_t> pick(std::vector<bool>& used, std::size_t count, Rng& rng) {
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < used.size(); ++i) {
        if (!used[i]) free.push_back(i);
    }
    if (free.size() < count) {
        throw Error(ErrorKind::OverlapError, "not enough free indices to place a " + std::to_string(count) +
                                                 "-wide plant without overlap");
    }
    std::shuffle(free.begin(), free.end(), rng);
    free.resize(count);
    std::sort(free.begin(), free.end());
    for (auto i : free) used[i] = true;
    return free;
}

}  // namespace

PlantSpec PlantSpec::parse(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t colon = text.find(':', start);
        parts.push_back(text.substr(start, colon == std::string_view::npos ? text.npos : colon - start));
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    if (parts.size() != 4) throw Error(ErrorKind::ParseError, "plant must be rows:cols:rank:pi");
    PlantSpec spec;
    spec.rows = field<std::size_t>(parts[0], "rows");
    spec.cols = field<std::size_t>(parts[1], "cols");
    spec.rank = field<std::size_t>(parts[2], "rank");
    spec.pi_target = field<double>(parts[3], "pi");
    return spec;
}

double planted_pi(const DenseMatrix& matrix, const std::vector<SubmatrixDescriptor>& truth, std::size_t index) {
    const auto [rows, cols] = nested_complement(matrix.rows(), matrix.cols(), truth, index);
    if (rows.empty() || cols.empty()) throw Error(ErrorKind::EmptyComplement, "plant leaves no complement");
    const double s = spectral_norm(gather(matrix.values(), truth[index].rows, truth[index].cols));
    const double t = spectral_norm(gather(matrix.values(), rows, cols));
    return (s * s) / (t * t);
}

SynthInstance generate(std::size_t n, std::size_t m, std::size_t r, const std::vector<PlantSpec>& plants,
                       std::uint64_t seed) {
    SynthInstance inst;
    inst.background_rank = r;
    Matrix values = low_rank_gaussian(n, m, r, seed).values();

    Rng placement_rng(mix_seed(seed, kPlacementStream));
    std::vector<bool> used_rows(n, false), used_cols(m, false);
    for (const PlantSpec& spec : plants) {
        if (!(spec.pi_target > 0.0)) throw Error(ErrorKind::UnachievablePi, "pi target must be positive");
        if (spec.rank < 1 || spec.rank > std::min(spec.rows, spec.cols)) {
            throw Error(ErrorKind::InvalidRank, "plant rank must lie in [1, min(rows, cols)]");
        }
        if (spec.placement) {
            const SubmatrixDescriptor& d = *spec.placement;
            d.validate(n, m);
            if (d.rows.size() != spec.rows || d.cols.size() != spec.cols) {
                throw Error(ErrorKind::InvalidArgument, "placement size differs from the plant size");
            }
            for (auto i : d.rows) {
                if (used_rows[i]) throw Error(ErrorKind::OverlapError, "plants share row " + std::to_string(i));
                used_rows[i] = true;
            }
            for (auto j : d.cols) {
                if (used_cols[j]) throw Error(ErrorKind::OverlapError, "plants share column " + std::to_string(j));
                used_cols[j] = true;
            }
            inst.truth.push_back(d);
        } else {
            auto rows = pick(used_rows, spec.rows, placement_rng);
            auto cols = pick(used_cols, spec.cols, placement_rng);
            inst.truth.push_back(SubmatrixDescriptor{std::move(rows), std::move(cols)});
        }
    }

    for (std::size_t p = 0; p < plants.size(); ++p) {
        const Matrix block = low_rank_gaussian(plants[p].rows, plants[p].cols, plants[p].rank, mix_seed(seed, p)).values();
        const SubmatrixDescriptor& d = inst.truth[p];
        for (std::size_t a = 0; a < d.rows.size(); ++a) {
            for (std::size_t b = 0; b < d.cols.size(); ++b) values(idx(d.rows[a]), idx(d.cols[b])) = block(idx(a), idx(b));
        }
    }

    for (std::size_t p = plants.size(); p-- > 0;) {
        const SubmatrixDescriptor& d = inst.truth[p];
        const auto [rows, cols] = nested_complement(n, m, inst.truth, p);
        if (rows.empty() || cols.empty()) {
            throw Error(ErrorKind::UnachievablePi, "plant " + std::to_string(p) + " leaves no complement");
        }
        const double s = spectral_norm(gather(values, d.rows, d.cols));
        const double t = spectral_norm(gather(values, rows, cols));
        if (s == 0.0 || t == 0.0) {
            throw Error(ErrorKind::UnachievablePi, "plant " + std::to_string(p) + " has a zero block or complement");
        }
        const double factor = std::sqrt(plants[p].pi_target) * t / s;
        for (auto i : d.rows) {
            for (auto j : d.cols) values(idx(i), idx(j)) *= factor;
        }
    }

    inst.matrix = DenseMatrix(std::move(values));
    for (std::size_t p = 0; p < plants.size(); ++p) inst.achieved_pi.push_back(planted_pi(inst.matrix, inst.truth, p));
    return inst;
}

}  // namespace targeted
