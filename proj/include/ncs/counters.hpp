#pragma once

#include <cstdint>

namespace ncs {

/// Per-run work tallies in the three categories of the complexity table.
/// An evaluation of a gradient counts as n evaluations, a Hessian as n^2.
struct EvaluationCounters {
  std::uint64_t input_evaluations = 0;
  std::uint64_t basis_evaluations = 0;
  // Estimated from the dimensions of each factorization or product.
  std::uint64_t arithmetic_ops = 0;

  EvaluationCounters& operator+=(const EvaluationCounters& o) {
    input_evaluations += o.input_evaluations;
    basis_evaluations += o.basis_evaluations;
    arithmetic_ops += o.arithmetic_ops;
    return *this;
  }
};

namespace ops {

inline std::uint64_t cube(std::uint64_t d) { return d * d * d; }
inline std::uint64_t product(std::uint64_t a, std::uint64_t b, std::uint64_t c) { return a * b * c; }

}  // namespace ops

}  // namespace ncs
