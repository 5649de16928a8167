#include "msopt/error.hpp"

namespace msopt {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kOutOfDomain: return "out-of-domain";
    case ErrorKind::kNumericFailure: return "numeric-failure";
    case ErrorKind::kInapplicable: return "inapplicable";
    case ErrorKind::kUndefinedMetric: return "undefined-metric";
    case ErrorKind::kIo: return "io-error";
  }
  return "unknown";
}

}  // namespace msopt
