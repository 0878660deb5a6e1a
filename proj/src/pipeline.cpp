#include "targeted/pipeline.hpp"

#include <chrono>
#include <string>

namespace targeted {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

SeparationMode parse_separation_mode(std::string_view name) {
    if (name == "zero-fill") return SeparationMode::ZeroFill;
    if (name == "delete") return SeparationMode::Delete;
    throw Error(ErrorKind::InvalidArgument, "unknown separation mode '" + std::string(name) + "'");
}

std::string_view separation_mode_name(SeparationMode mode) noexcept {
    return mode == SeparationMode::Delete ? "delete" : "zero-fill";
}

DenseMatrix assemble(const std::vector<SubmatrixDescriptor>& descriptors,
                     const std::vector<CompletionOutput>& per_component) {
    if (per_component.size() != descriptors.size() + 1) {
        throw Error(ErrorKind::InvalidArgument, "need one completion per descriptor plus the remainder");
    }
    Matrix values = per_component.back().estimate.values();
    for (std::size_t c = 0; c < descriptors.size(); ++c) {
        const SubmatrixDescriptor& d = descriptors[c];
        const Matrix& block = per_component[c].estimate.values();
        for (std::size_t a = 0; a < d.rows.size(); ++a) {
            for (std::size_t b = 0; b < d.cols.size(); ++b) {
                values(static_cast<Eigen::Index>(d.rows[a]), static_cast<Eigen::Index>(d.cols[b])) =
                    block(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            }
        }
    }
    return DenseMatrix(std::move(values));
}

TargetedResult targeted_complete(const ObservedMatrix& m, const TargetedConfig& cfg, std::uint64_t seed) {
    if (m.empty()) throw Error(ErrorKind::EmptyObservation, "no observed entries");
    TargetedResult result;

    auto start = std::chrono::steady_clock::now();
    result.discoveries = discover_all(m, cfg.svp);
    result.times.discover_s = seconds_since(start);

    start = std::chrono::steady_clock::now();
    std::vector<SubmatrixDescriptor> descriptors;
    ObservedMatrix remainder = m;
    for (std::size_t c = 0; c < result.discoveries.size(); ++c) {
        const SubmatrixDescriptor& d = result.discoveries[c].descriptor;
        descriptors.push_back(d);
        result.per_component.push_back(complete(restrict(m, d), cfg.completion, seed + c));
        remainder = cfg.separation_mode == SeparationMode::Delete ? remove_cells(remainder, d)
                                                                  : zero_out(remainder, d);
    }
    result.per_component.push_back(complete(remainder, cfg.completion, seed + descriptors.size()));
    result.estimate = assemble(descriptors, result.per_component);
    result.times.complete_s = seconds_since(start);
    return result;
}

}  // namespace targeted
