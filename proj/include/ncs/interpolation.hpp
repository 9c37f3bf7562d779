#pragma once

// Generalized Vandermonde matrices, Gram matrices and minimal-norm
// interpolation over a perturbation basis.

#include <cstddef>
#include <vector>

#include "ncs/counters.hpp"
#include "ncs/functions.hpp"
#include "ncs/linalg.hpp"

namespace ncs {

/// k nodes in C^n. Flattened order is node-major, variable-minor.
class RootTuple {
 public:
  RootTuple() = default;
  explicit RootTuple(std::vector<ComplexVector> nodes);

  static RootTuple from_flat(const ComplexVector& flat, std::size_t variables);

  std::size_t size() const { return nodes_.size(); }
  std::size_t variables() const { return nodes_.empty() ? 0 : static_cast<std::size_t>(nodes_[0].size()); }
  const ComplexVector& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<ComplexVector>& nodes() const { return nodes_; }

  ComplexVector flat() const;
  double min_pairwise_distance() const;
  bool all_finite() const;

 private:
  std::vector<ComplexVector> nodes_;
};

struct VandermondeMatrix {
  ComplexMatrix matrix;  // k x m, entry (i, j) = b_j(z_i)
};

VandermondeMatrix build_vandermonde(const BasisSet& basis, const RootTuple& z,
                                    EvaluationCounters* counters = nullptr);

/// M_B = V V^*.
ComplexMatrix gram_matrix(const VandermondeMatrix& v);

/// Column i holds the coefficients of L_{B,i} in the basis.
struct LagrangeCoefficients {
  ComplexMatrix coefficients;  // m x k

  /// L_{B,i}(x) for the given basis.
  Complex evaluate(const BasisSet& basis, std::size_t i, const ComplexVector& x) const;
};

/// Throws RankDeficient when the numerical rank of V is below k.
LagrangeCoefficients lagrange_coefficients(const VandermondeMatrix& v, double rank_tol);
LagrangeCoefficients lagrange_coefficients(const VandermondeMatrix& v);

/// Coefficient vector V^dagger f for the given node values. Throws RankDeficient.
ComplexVector min_norm_coefficients(const VandermondeMatrix& v, const ComplexVector& values);

/// The element of span(B) of least coefficient norm that agrees with f at
/// every node.
BasisExpansion min_norm_interpolant(const AnalyticFunction& f, const BasisSet& basis,
                                    const RootTuple& z);

/// f^* M^{-1} f. Throws SingularMatrix when the Gram matrix is singular.
double interpolant_norm_sq(const ComplexVector& values, const ComplexMatrix& gram);

}  // namespace ncs
