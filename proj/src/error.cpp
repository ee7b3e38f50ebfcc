#include "hpl/error.hpp"

namespace hpl {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::config: return "config";
    case ErrorKind::quadrature: return "quadrature";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::budget: return "budget";
    case ErrorKind::horizon: return "horizon";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::bound_violation: return "bound_violation";
    case ErrorKind::weight_collapse: return "weight_collapse";
    case ErrorKind::barrier_miss: return "barrier_miss";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::length_mismatch: return "length_mismatch";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace hpl
