#ifndef ADVR_ERROR_HPP
#define ADVR_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace advr {

enum class ErrorKind {
  Dimension,
  Argument,
  Io,
  MalformedPayload,
  ShapeInconsistency,
  WrongMagic,
  CountMismatch,
  Truncated,
  DegenerateGradient,
  BadPrefix,
  MissingMetric,
  DuplicateMetric,
  UnknownCode,
  Config,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and the CLI
// exit-code mapping) can tell them apart without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace advr

#endif  // ADVR_ERROR_HPP
