#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace irpdfl {

// Bad arguments to a generator, builder or config (counts, weights, rates).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Vector/matrix sizes that do not agree with the program or model.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the domain of a function (log of a nonpositive value, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed instance/model/dataset file. `field()` names the offending key
// (or the path, for unreadable files).
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// KKT system cannot be inverted because variable `index` has both x_j and
// its dual slack at zero.
class DegenerateError : public std::runtime_error {
 public:
  DegenerateError(std::size_t index, const std::string& what)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// An evaluator called by finite_difference_jacobian failed while coordinate
// `index` was perturbed.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(std::size_t index, const std::string& what)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// A solve whose result is needed was infeasible or did not converge.
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace irpdfl
