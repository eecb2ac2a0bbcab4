#pragma once

#include <stdexcept>
#include <string>

namespace sd2 {

enum class ErrorKind {
    Domain,
    InvalidKey,
    Range,
    InvalidPermutation,
    LengthMismatch,
    CapacityExceeded,
    MalformedHeader,
    UnknownKind,
    ShapeMismatch,
    DimensionMismatch,
    InvalidSchedule,
    InvalidPlan,
    Io,
    Config,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::InvalidKey: return "invalid-key";
    case ErrorKind::Range: return "range";
    case ErrorKind::InvalidPermutation: return "invalid-permutation";
    case ErrorKind::LengthMismatch: return "length-mismatch";
    case ErrorKind::CapacityExceeded: return "capacity";
    case ErrorKind::MalformedHeader: return "malformed-header";
    case ErrorKind::UnknownKind: return "unknown-kind";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::InvalidSchedule: return "invalid-schedule";
    case ErrorKind::InvalidPlan: return "invalid-plan";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
    }
    return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised when a payload does not fit; keeps both sides of the comparison.
class CapacityError : public Error {
public:
    CapacityError(std::size_t required, std::size_t available)
        : Error(ErrorKind::CapacityExceeded,
                "capacity exceeded: required " + std::to_string(required) +
                    " bytes, available " + std::to_string(available)),
          required_(required), available_(available) {}

    std::size_t required() const noexcept { return required_; }
    std::size_t available() const noexcept { return available_; }

private:
    std::size_t required_;
    std::size_t available_;
};

} // namespace sd2
