#include "targeted/observed.hpp"

#include "targeted/rng.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace targeted {

namespace {

bool cell_less(const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
}

// Position of each global index inside the sorted index list, or npos.
std::vector<std::size_t> local_index(const std::vector<std::size_t>& sorted, std::size_t n) {
    std::vector<std::size_t> map(n, static_cast<std::size_t>(-1));
    for (std::size_t a = 0; a < sorted.size(); ++a) map[sorted[a]] = a;
    return map;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line_no) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
    T value{};
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw Error(ErrorKind::ParseError,
                    "bad field '" + std::string(text) + "' on line " + std::to_string(line_no));
    }
    return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

}  // namespace

ObservedMatrix::ObservedMatrix(std::size_t rows, std::size_t cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (!std::is_sorted(entries_.begin(), entries_.end(), cell_less)) {
        std::sort(entries_.begin(), entries_.end(), cell_less);
    }
    for (std::size_t e = 0; e < entries_.size(); ++e) {
        const Entry& x = entries_[e];
        if (x.row >= rows_ || x.col >= cols_) {
            throw Error(ErrorKind::InvalidArgument, "entry (" + std::to_string(x.row) + "," +
                                                        std::to_string(x.col) + ") out of range");
        }
        if (!std::isfinite(x.value)) {
            throw Error(ErrorKind::InvalidArgument, "non-finite value at (" + std::to_string(x.row) +
                                                        "," + std::to_string(x.col) + ")");
        }
        if (e > 0 && entries_[e - 1].row == x.row && entries_[e - 1].col == x.col) {
            throw Error(ErrorKind::InvalidArgument, "duplicate entry (" + std::to_string(x.row) +
                                                        "," + std::to_string(x.col) + ")");
        }
    }
}

ObservedMatrix ObservedMatrix::from_dense(const DenseMatrix& m) {
    std::vector<Entry> entries;
    entries.reserve(m.rows() * m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) entries.push_back({i, j, m(i, j)});
    }
    return ObservedMatrix(m.rows(), m.cols(), std::move(entries));
}

double ObservedMatrix::density() const noexcept {
    const std::size_t cells = rows_ * cols_;
    return cells == 0 ? 0.0 : static_cast<double>(entries_.size()) / static_cast<double>(cells);
}

ObservedMatrix ObservedMatrix::transposed() const {
    std::vector<Entry> flipped;
    flipped.reserve(entries_.size());
    for (const Entry& e : entries_) flipped.push_back({e.col, e.row, e.value});
    return ObservedMatrix(cols_, rows_, std::move(flipped));
}

SubmatrixDescriptor SubmatrixDescriptor::make(std::vector<std::size_t> rows,
                                              std::vector<std::size_t> cols) {
    if (rows.empty() || cols.empty()) {
        throw Error(ErrorKind::EmptyDescriptor, "descriptor needs at least one row and one column");
    }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    return {std::move(rows), std::move(cols)};
}

SubmatrixDescriptor SubmatrixDescriptor::full(std::size_t n_rows, std::size_t n_cols) {
    SubmatrixDescriptor d;
    d.rows.resize(n_rows);
    d.cols.resize(n_cols);
    std::iota(d.rows.begin(), d.rows.end(), std::size_t{0});
    std::iota(d.cols.begin(), d.cols.end(), std::size_t{0});
    return d;
}

bool SubmatrixDescriptor::contains(std::size_t row, std::size_t col) const noexcept {
    return std::binary_search(rows.begin(), rows.end(), row) &&
           std::binary_search(cols.begin(), cols.end(), col);
}

void SubmatrixDescriptor::validate(std::size_t n_rows, std::size_t n_cols) const {
    if (rows.empty() || cols.empty()) {
        throw Error(ErrorKind::EmptyDescriptor, "descriptor has an empty side");
    }
    auto ok = [](const std::vector<std::size_t>& v, std::size_t n) {
        return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end() && v.back() < n;
    };
    if (!ok(rows, n_rows) || !ok(cols, n_cols)) {
        throw Error(ErrorKind::InvalidArgument,
                    "descriptor indices must be sorted, unique and inside " + std::to_string(n_rows) +
                        "x" + std::to_string(n_cols));
    }
}

std::vector<std::size_t> complement(const std::vector<std::size_t>& taken, std::size_t n) {
    std::vector<std::size_t> rest;
    rest.reserve(n >= taken.size() ? n - taken.size() : 0);
    std::size_t t = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (t < taken.size() && taken[t] == i) {
            ++t;
        } else {
            rest.push_back(i);
        }
    }
    return rest;
}

ObservedMatrix mask_uniform(const DenseMatrix& m, double observed_fraction, std::uint64_t seed) {
    if (!(observed_fraction >= 0.0 && observed_fraction <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "observed fraction must lie in [0, 1]");
    }
    const std::size_t cells = m.rows() * m.cols();
    const auto keep = static_cast<std::size_t>(std::llround(observed_fraction * static_cast<double>(cells)));
    std::vector<std::size_t> order(cells);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    // Partial Fisher-Yates: the first `keep` slots are a uniform sample.
    for (std::size_t a = 0; a < keep; ++a) {
        std::uniform_int_distribution<std::size_t> pick(a, cells - 1);
        std::swap(order[a], order[pick(rng)]);
    }
    order.resize(keep);
    std::sort(order.begin(), order.end());
    std::vector<Entry> entries;
    entries.reserve(keep);
    for (std::size_t flat : order) {
        const std::size_t i = flat / m.cols();
        const std::size_t j = flat % m.cols();
        entries.push_back({i, j, m(i, j)});
    }
    return ObservedMatrix(m.rows(), m.cols(), std::move(entries));
}

ObservedMatrix restrict(const ObservedMatrix& m, const SubmatrixDescriptor& d) {
    d.validate(m.rows(), m.cols());
    const auto row_map = local_index(d.rows, m.rows());
    const auto col_map = local_index(d.cols, m.cols());
    std::vector<Entry> kept;
    for (const Entry& e : m.entries()) {
        const std::size_t a = row_map[e.row];
        const std::size_t b = col_map[e.col];
        if (a != static_cast<std::size_t>(-1) && b != static_cast<std::size_t>(-1)) {
            kept.push_back({a, b, e.value});
        }
    }
    return ObservedMatrix(d.rows.size(), d.cols.size(), std::move(kept));
}

ObservedMatrix zero_out(const ObservedMatrix& m, const SubmatrixDescriptor& d) {
    d.validate(m.rows(), m.cols());
    std::vector<Entry> entries = m.entries();
    for (Entry& e : entries) {
        if (d.contains(e.row, e.col)) e.value = 0.0;
    }
    return ObservedMatrix(m.rows(), m.cols(), std::move(entries));
}

ObservedMatrix remove_cells(const ObservedMatrix& m, const SubmatrixDescriptor& d) {
    d.validate(m.rows(), m.cols());
    std::vector<Entry> entries;
    entries.reserve(m.size());
    for (const Entry& e : m.entries()) {
        if (!d.contains(e.row, e.col)) entries.push_back(e);
    }
    return ObservedMatrix(m.rows(), m.cols(), std::move(entries));
}

DenseMatrix fill_zeros(const ObservedMatrix& m) {
    Matrix dense = Matrix::Zero(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (const Entry& e : m.entries()) {
        dense(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.value;
    }
    return DenseMatrix(std::move(dense));
}

void write_triplets(std::ostream& out, const ObservedMatrix& m) {
    out << m.rows() << ',' << m.cols() << '\n';
    std::array<char, 32> buf{};
    for (const Entry& e : m.entries()) {
        auto res = std::to_chars(buf.data(), buf.data() + buf.size(), e.value);
        out << e.row << ',' << e.col << ',';
        out.write(buf.data(), res.ptr - buf.data());
        out << '\n';
    }
}

ObservedMatrix read_triplets(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };
    if (!next_line()) throw Error(ErrorKind::ParseError, "missing 'n_rows,n_cols' header");
    auto header = split_commas(line);
    if (header.size() != 2) throw Error(ErrorKind::ParseError, "header must be 'n_rows,n_cols'");
    const auto rows = parse_number<std::size_t>(header[0], line_no);
    const auto cols = parse_number<std::size_t>(header[1], line_no);
    std::vector<Entry> entries;
    while (next_line()) {
        auto fields = split_commas(line);
        if (fields.size() != 3) {
            throw Error(ErrorKind::ParseError, "expected 'i,j,value' on line " + std::to_string(line_no));
        }
        entries.push_back({parse_number<std::size_t>(fields[0], line_no),
                           parse_number<std::size_t>(fields[1], line_no),
                           parse_number<double>(fields[2], line_no)});
    }
    return ObservedMatrix(rows, cols, std::move(entries));
}

void save_triplets(const std::filesystem::path& path, const ObservedMatrix& m) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    write_triplets(out, m);
}

ObservedMatrix load_triplets(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
    return read_triplets(in);
}

void write_descriptors(std::ostream& out, const std::vector<SubmatrixDescriptor>& ds) {
    for (const auto& d : ds) {
        out << "rows:";
        for (auto i : d.rows) out << ' ' << i;
        out << "\ncols:";
        for (auto j : d.cols) out << ' ' << j;
        out << '\n';
    }
}

std::vector<SubmatrixDescriptor> read_descriptors(std::istream& in) {
    std::vector<SubmatrixDescriptor> out;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::size_t> pending_rows;
    bool have_rows = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const bool is_rows = line.rfind("rows:", 0) == 0;
        const bool is_cols = line.rfind("cols:", 0) == 0;
        if (!is_rows && !is_cols) {
            throw Error(ErrorKind::ParseError, "expected 'rows:' or 'cols:' on line " + std::to_string(line_no));
        }
        if (is_rows == have_rows) {
            throw Error(ErrorKind::ParseError, "descriptor lines out of order at line " + std::to_string(line_no));
        }
        std::istringstream fields(line.substr(5));
        std::vector<std::size_t> indices;
        std::string token;
        while (fields >> token) indices.push_back(parse_number<std::size_t>(token, line_no));
        if (is_rows) {
            pending_rows = std::move(indices);
            have_rows = true;
        } else {
            out.push_back(SubmatrixDescriptor::make(std::move(pending_rows), std::move(indices)));
            pending_rows.clear();
            have_rows = false;
        }
    }
    if (have_rows) throw Error(ErrorKind::ParseError, "descriptor missing its 'cols:' line");
    return out;
}

void save_descriptors(const std::filesystem::path& path, const std::vector<SubmatrixDescriptor>& ds) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    write_descriptors(out, ds);
}

std::vector<SubmatrixDescriptor> load_descriptors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
    return read_descriptors(in);
}

}  // namespace targeted
