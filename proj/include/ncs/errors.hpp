#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ncs {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

/// The nodes are outside R_B for some basis: the Vandermonde matrix lost rank.
class RankDeficient : public Error {
 public:
  explicit RankDeficient(const std::string& what, std::optional<std::size_t> basis = std::nullopt)
      : Error(what), basis_(basis) {}

  /// Index of the offending basis within the system, when known.
  std::optional<std::size_t> basis() const { return basis_; }

 private:
  std::optional<std::size_t> basis_;
};

class AssumptionViolated : public Error {
 public:
  using Error::Error;
};

class RankDeficientNodeJacobian : public Error {
 public:
  RankDeficientNodeJacobian(const std::string& what, std::size_t node) : Error(what), node_(node) {}
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

class SingularNormalMatrix : public Error {
 public:
  using Error::Error;
};

class GenerationDegenerate : public Error {
 public:
  using Error::Error;
};

class ScalingViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace ncs
