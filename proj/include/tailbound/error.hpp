#ifndef TAILBOUND_ERROR_HPP
#define TAILBOUND_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tailbound {

enum class ErrorKind {
  domain,        // argument outside the mathematical domain
  empty_input,
  order,         // not enough moments carried for the requested order
  infeasible,    // moment vector violates a feasibility chain
  degenerate,    // zero first / p-th moment where a positive one is required
  precondition,  // caller-checkable precondition of a corollary
  solver,        // root finding failed
  oracle,        // quadrature or sampling failure
  config,        // CLI / configuration problem
  consistency    // internal numerical inconsistency
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::order: return "order";
    case ErrorKind::infeasible: return "infeasible-moments";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::solver: return "solver-failure";
    case ErrorKind::oracle: return "oracle";
    case ErrorKind::config: return "config";
    case ErrorKind::consistency: return "consistency";
  }
  return "unknown";
}

/// Single exception type for the library; `kind()` tells callers (and the
/// CLI exit-code mapping) which contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace detail
}  // namespace tailbound

#endif  // TAILBOUND_ERROR_HPP
