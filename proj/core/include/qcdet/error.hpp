#pragma once

#include <stdexcept>
#include <string>

namespace qcdet {

enum class ErrorKind {
  kInvalidSize,
  kInvalidInput,
  kInvalidParameter,
  kOutOfDomain,
  kNotApplicable,
  kUndecidable,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers which
/// contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qcdet
