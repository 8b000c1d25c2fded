#pragma once

#include <stdexcept>
#include <string>

namespace fdcp {

enum class ErrorKind {
    InvalidArgument,
    IllPosedFit,
    InvalidSplit,
    InsufficientSample,
    DegenerateCorrection,
    DegenerateKernel,
    DegenerateData,
    TableMiss,
    ParseError,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// front ends can map it to an exit code or a Python exception.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), m_kind(kind) {}

    ErrorKind kind() const noexcept { return m_kind; }

private:
    ErrorKind m_kind;
};

}  // namespace fdcp
