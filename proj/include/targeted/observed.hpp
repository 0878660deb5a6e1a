#pragma once

#include "targeted/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace targeted {

struct Entry {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;

    friend bool operator==(const Entry&, const Entry&) = default;
};

/// Partially observed matrix M_Omega stored as triplets. Entries are kept in
/// row-major order with no duplicate cells.
class ObservedMatrix {
public:
    ObservedMatrix() = default;
    /// Sorts the entries; throws InvalidArgument on out-of-range indices,
    /// duplicate cells or non-finite values.
    ObservedMatrix(std::size_t rows, std::size_t cols, std::vector<Entry> entries);

    static ObservedMatrix from_dense(const DenseMatrix& m);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    double density() const noexcept;
    bool fully_observed() const noexcept { return entries_.size() == rows_ * cols_; }

    ObservedMatrix transposed() const;

    friend bool operator==(const ObservedMatrix&, const ObservedMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Entry> entries_;
};

/// Row set R_s and column set C_s of a submatrix, both sorted and unique.
struct SubmatrixDescriptor {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;

    /// Sorts and deduplicates; throws EmptyDescriptor if either side is empty.
    static SubmatrixDescriptor make(std::vector<std::size_t> rows, std::vector<std::size_t> cols);
    static SubmatrixDescriptor full(std::size_t n_rows, std::size_t n_cols);

    std::size_t cell_count() const noexcept { return rows.size() * cols.size(); }
    bool contains(std::size_t row, std::size_t col) const noexcept;
    /// Throws EmptyDescriptor / InvalidArgument unless the descriptor fits an n x m host.
    void validate(std::size_t n_rows, std::size_t n_cols) const;

    friend bool operator==(const SubmatrixDescriptor&, const SubmatrixDescriptor&) = default;
};

/// Sorted indices of {0..n-1} not present in the sorted set `taken`.
std::vector<std::size_t> complement(const std::vector<std::size_t>& taken, std::size_t n);

/// Keeps exactly round(fraction * n * m) cells chosen uniformly without replacement.
ObservedMatrix mask_uniform(const DenseMatrix& m, double observed_fraction, std::uint64_t seed);

/// Observed entries inside the descriptor, reindexed to local coordinates
/// (local row a is global row d.rows[a]).
ObservedMatrix restrict(const ObservedMatrix& m, const SubmatrixDescriptor& d);

/// Sets observed values inside the descriptor to 0; the cells stay observed.
ObservedMatrix zero_out(const ObservedMatrix& m, const SubmatrixDescriptor& d);

/// Drops observed entries inside the descriptor from Omega.
ObservedMatrix remove_cells(const ObservedMatrix& m, const SubmatrixDescriptor& d);

DenseMatrix fill_zeros(const ObservedMatrix& m);

// Triplet format: "n_rows,n_cols" then one "i,j,value" line per entry.
void write_triplets(std::ostream& out, const ObservedMatrix& m);
ObservedMatrix read_triplets(std::istream& in);
void save_triplets(const std::filesystem::path& path, const ObservedMatrix& m);
ObservedMatrix load_triplets(const std::filesystem::path& path);

// Descriptor format: "rows: i1 i2 ..." and "cols: j1 j2 ..."; a file may
// hold several descriptors as consecutive line pairs.
void write_descriptors(std::ostream& out, const std::vector<SubmatrixDescriptor>& ds);
std::vector<SubmatrixDescriptor> read_descriptors(std::istream& in);
void save_descriptors(const std::filesystem::path& path, const std::vector<SubmatrixDescriptor>& ds);
std::vector<SubmatrixDescriptor> load_descriptors(const std::filesystem::path& path);

}  // namespace targeted
