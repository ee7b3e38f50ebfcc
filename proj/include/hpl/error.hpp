#pragma once

#include <stdexcept>
#include <string>

namespace hpl {

enum class ErrorKind {
  domain,
  config,
  quadrature,
  numerical,
  budget,
  horizon,
  resolution,
  bound_violation,
  weight_collapse,
  barrier_miss,
  degenerate,
  length_mismatch,
  io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool ok, ErrorKind kind, const char* what) {
  if (!ok) fail(kind, what);
}

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace hpl
