#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgki {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Two sample inputs coincide; the Gram matrix would be singular.
class DuplicateInput : public Error {
 public:
  DuplicateInput(std::size_t first, std::size_t second)
      : Error("duplicate input points at indices " + std::to_string(first) + " and " +
              std::to_string(second)),
        first_(first),
        second_(second) {}

  std::size_t first() const noexcept { return first_; }
  std::size_t second() const noexcept { return second_; }

 private:
  std::size_t first_;
  std::size_t second_;
};

// Cholesky factorization hit a non-positive pivot.
class ConditioningError : public Error {
 public:
  ConditioningError(std::size_t pivot, double jitter)
      : Error("Gram matrix is not numerically positive definite (pivot " + std::to_string(pivot) +
              ", jitter " + std::to_string(jitter) + "); raise the jitter"),
        pivot_(pivot) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

// Query numerically coincides with a sample (Schur complement below floor).
class NearDuplicateQuery : public Error {
 public:
  explicit NearDuplicateQuery(double g0)
      : Error("query numerically coincides with a sample or the system is too ill-conditioned "
              "(schur complement " + std::to_string(g0) + ")"),
        g0_(g0) {}

  double schur() const noexcept { return g0_; }

 private:
  double g0_;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class NoData : public Error {
 public:
  using Error::Error;
};

// Malformed NetPBM input. offset is the byte position where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace sgki
