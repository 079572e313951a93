#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hlgraph {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroVector : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class UnknownGraph : public Error {
 public:
  using Error::Error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DanglingNode : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Raised by a budgeted oracle once its ledger reached the query cap.
class BudgetExhausted : public Error {
 public:
  explicit BudgetExhausted(std::uint64_t budget)
      : Error("query budget of " + std::to_string(budget) + " exhausted"), budget_(budget) {}

  std::uint64_t budget() const { return budget_; }

 private:
  std::uint64_t budget_;
};

// No label change along a search direction, even with every positive component flipped.
class NoBoundary : public Error {
 public:
  using Error::Error;
};

// The level set p = p_old is empty or not unique along the requested direction.
class DegenerateTarget : public Error {
 public:
  using Error::Error;
};

class NoAdversarialFound : public Error {
 public:
  using Error::Error;
};

}  // namespace hlgraph
