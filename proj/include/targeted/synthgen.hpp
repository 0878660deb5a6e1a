#pragma once

#include "targeted/linalg.hpp"
#include "targeted/observed.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace targeted {

struct PlantSpec {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t rank = 1;
    double pi_target = 1.2;
    std::optional<SubmatrixDescriptor> placement;  // random when empty

    /// Parses "rows:cols:rank:pi".
    static PlantSpec parse(std::string_view text);
};

struct SynthInstance {
    DenseMatrix matrix;
    std::vector<SubmatrixDescriptor> truth;
    std::size_t background_rank = 0;
    std::vector<double> achieved_pi;
};

/// Low-rank Gaussian background with planted blocks that overwrite their
/// cells. Plant p is scaled so that ||S_p||^2 / ||T_p||^2 hits its target,
/// where T_p is the complement of S_p inside the matrix that remains after
/// deleting the rows and columns of plants 0..p-1 (for a single plant this is
/// the ordinary complement M(R_s', C_s')). Scaling runs from the last plant to
/// the first, so every plant sees final values in its complement.
SynthInstance generate(std::size_t n, std::size_t m, std::size_t r, const std::vector<PlantSpec>& plants,
                       std::uint64_t seed);

/// ||S||^2 / ||T||^2 for plant `index` of `truth`, using the nested complement above.
double planted_pi(const DenseMatrix& matrix, const std::vector<SubmatrixDescriptor>& truth, std::size_t index);

}  // namespace targeted
