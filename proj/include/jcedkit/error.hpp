#pragma once

#include <stdexcept>
#include <string>

namespace jced {

// Every error raised by the library derives from Error so callers (the CLI in
// particular) can map families onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document; `where` is a JSON path or "line:col" location.
class ParseError : public Error {
 public:
  ParseError(const std::string& where, const std::string& what)
      : Error(where + ": " + what), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Numerical failure inside a module (singular matrix, unstable integration...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The solver backend could not be reached or returned garbage.
class BackendError : public Error {
 public:
  using Error::Error;
};

// The optimization model has no feasible point. `family` names the row family
// that the infeasibility diagnosis points at (may be empty).
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& family, const std::string& what)
      : Error(what), family_(family) {}
  const std::string& family() const noexcept { return family_; }

 private:
  std::string family_;
};

}  // namespace jced
