#include "seqthresh/error.hpp"

namespace seqthresh {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Configuration: return "configuration error";
    case ErrorKind::Usage: return "usage error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::DegenerateBoundary: return "degenerate-boundary error";
    case ErrorKind::DriftSign: return "drift-sign error";
    case ErrorKind::BoundInapplicable: return "bound-inapplicable error";
    case ErrorKind::TrialFailed: return "trial failure";
  }
  return "error";
}

}  // namespace seqthresh
