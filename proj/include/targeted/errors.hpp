#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace targeted {

/// Failure categories raised by the library. The CLI prints `name()` so
/// scripts can match on it.
enum class ErrorKind {
    ZeroMatrix,
    NoConvergence,
    InvalidRank,
    InvalidArgument,
    DimensionMismatch,
    EmptyDescriptor,
    EmptyObservation,
    EmptyComplement,
    EmptySplit,
    DegeneratePartition,
    NoSubmatrixFound,
    RankTooLarge,
    OverlapError,
    UnachievablePi,
    ZeroTruth,
    NonMonotone,
    ParseError,
    IoError,
};

std::string_view error_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_name(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept { return error_name(kind_); }

private:
    ErrorKind kind_;
};

}  // namespace targeted
