#pragma once

#include "targeted/completion.hpp"
#include "targeted/svp.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace targeted {

enum class SeparationMode {
    ZeroFill,  // extracted cells stay observed with value 0 in the remainder
    Delete,    // extracted cells are dropped from the remainder's Omega
};

SeparationMode parse_separation_mode(std::string_view name);
std::string_view separation_mode_name(SeparationMode mode) noexcept;

struct TargetedConfig {
    SvpConfig svp;
    CompletionConfig completion;
    SeparationMode separation_mode = SeparationMode::ZeroFill;
};

struct StageTimes {
    double discover_s = 0.0;
    double complete_s = 0.0;
};

struct TargetedResult {
    DenseMatrix estimate;
    std::vector<Discovery> discoveries;
    /// One output per discovered submatrix, in discovery order, then the remainder.
    std::vector<CompletionOutput> per_component;
    StageTimes times;
};

/// Discover submatrices, complete each one and the separated remainder
/// independently, and stitch the estimates back together. Component i uses
/// seed + i; the remainder uses seed + (number of submatrices).
TargetedResult targeted_complete(const ObservedMatrix& m, const TargetedConfig& cfg, std::uint64_t seed);

/// Rebuilds the full estimate from per-component outputs: cells inside a
/// descriptor come from that submatrix, every other cell from the remainder.
DenseMatrix assemble(const std::vector<SubmatrixDescriptor>& descriptors,
                     const std::vector<CompletionOutput>& per_component);

}  // namespace targeted
