#include "qcdet/error.hpp"

namespace qcdet {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidSize: return "invalid-size";
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kInvalidParameter: return "invalid-parameter";
    case ErrorKind::kOutOfDomain: return "out-of-domain";
    case ErrorKind::kNotApplicable: return "not-applicable";
    case ErrorKind::kUndecidable: return "undecidable";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace qcdet
