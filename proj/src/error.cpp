#include "fdcp/error.hpp"

namespace fdcp {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::IllPosedFit: return "ill-posed-fit";
    case ErrorKind::InvalidSplit: return "invalid-split";
    case ErrorKind::InsufficientSample: return "insufficient-sample";
    case ErrorKind::DegenerateCorrection: return "degenerate-correction";
    case ErrorKind::DegenerateKernel: return "degenerate-kernel";
    case ErrorKind::DegenerateData: return "degenerate-data";
    case ErrorKind::TableMiss: return "table-miss";
    case ErrorKind::ParseError: return "parse-error";
    }
    return "unknown";
}

}  // namespace fdcp
