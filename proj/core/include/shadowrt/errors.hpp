#pragma once

#include <stdexcept>
#include <string>

namespace shadowrt {

// Every library failure derives from Error. The CLI maps DomainError (and its
// input-shaped cousins) to exit status 1 and SolverError to exit status 2.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("DomainError", what) {}
  DomainError(std::string code, const std::string& what) : Error(std::move(code), what) {}
};

class PoleProximityError : public DomainError {
 public:
  explicit PoleProximityError(const std::string& what)
      : DomainError("PoleProximity", what) {}
};

class UnsupportedSlope : public DomainError {
 public:
  explicit UnsupportedSlope(const std::string& what)
      : DomainError("UnsupportedSlope", what) {}
};

class PresentationError : public DomainError {
 public:
  explicit PresentationError(const std::string& what)
      : DomainError("PresentationError", what) {}
};

class ParseError : public DomainError {
 public:
  explicit ParseError(const std::string& what) : DomainError("ParseError", what) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error("SolverError", what) {}
};

// Guards against states that indicate a bug rather than bad input.
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& what)
      : Error("InvariantViolation", what) {}
};

}  // namespace shadowrt
