#pragma once

#include <stdexcept>
#include <string>

namespace seqthresh {

enum class ErrorKind {
  Parameter,          // model or instance invariant violated
  Domain,             // argument outside a function's domain
  Configuration,      // experiment / sweep configuration invalid
  Usage,              // operation called on the wrong kind of input
  Io,
  DegenerateBoundary,
  DriftSign,
  BoundInapplicable,
  TrialFailed,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace seqthresh
