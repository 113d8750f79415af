#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rbl {

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kDegenerateGeometry,
  kNumericalDegeneracy,
  kIo,
  kParse,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this type; `kind()` is what the
// CLI prints in its machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rbl
