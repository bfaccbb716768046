#include "advr/error.hpp"

namespace advr {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Io: return "io";
    case ErrorKind::MalformedPayload: return "malformed-payload";
    case ErrorKind::ShapeInconsistency: return "shape-inconsistency";
    case ErrorKind::WrongMagic: return "wrong-magic";
    case ErrorKind::CountMismatch: return "count-mismatch";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::DegenerateGradient: return "degenerate-gradient";
    case ErrorKind::BadPrefix: return "bad-prefix";
    case ErrorKind::MissingMetric: return "missing-metric";
    case ErrorKind::DuplicateMetric: return "duplicate-metric";
    case ErrorKind::UnknownCode: return "unknown-code";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

}  // namespace advr
