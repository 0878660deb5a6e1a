#include "targeted/errors.hpp"

namespace targeted {

std::string_view error_name(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::ZeroMatrix: return "ZeroMatrix";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::InvalidRank: return "InvalidRank";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::EmptyDescriptor: return "EmptyDescriptor";
        case ErrorKind::EmptyObservation: return "EmptyObservation";
        case ErrorKind::EmptyComplement: return "EmptyComplement";
        case ErrorKind::EmptySplit: return "EmptySplit";
        case ErrorKind::DegeneratePartition: return "DegeneratePartition";
        case ErrorKind::NoSubmatrixFound: return "NoSubmatrixFound";
        case ErrorKind::RankTooLarge: return "RankTooLarge";
        case ErrorKind::OverlapError: return "OverlapError";
        case ErrorKind::UnachievablePi: return "UnachievablePi";
        case ErrorKind::ZeroTruth: return "ZeroTruth";
        case ErrorKind::NonMonotone: return "NonMonotone";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace targeted
