#include "ncs/interpolation.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "ncs/errors.hpp"

namespace ncs {

RootTuple::RootTuple(std::vector<ComplexVector> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw InvalidArgument("RootTuple: need at least one node");
  const Index n = nodes_.front().size();
  if (n == 0) throw InvalidArgument("RootTuple: nodes need at least one coordinate");
  for (const auto& node : nodes_) {
    if (node.size() != n) throw DimensionMismatch("RootTuple: nodes differ in dimension");
  }
}

RootTuple RootTuple::from_flat(const ComplexVector& flat, std::size_t variables) {
  const auto n = static_cast<Index>(variables);
  if (n == 0 || flat.size() % n != 0) {
    throw DimensionMismatch("RootTuple::from_flat: length is not a multiple of the variable count");
  }
  std::vector<ComplexVector> nodes;
  for (Index i = 0; i < flat.size() / n; ++i) nodes.emplace_back(flat.segment(i * n, n));
  return RootTuple(std::move(nodes));
}

ComplexVector RootTuple::flat() const {
  const auto n = static_cast<Index>(variables());
  ComplexVector out(static_cast<Index>(size()) * n);
  for (std::size_t i = 0; i < size(); ++i) out.segment(static_cast<Index>(i) * n, n) = nodes_[i];
  return out;
}

double RootTuple::min_pairwise_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) {
      best = std::min(best, (nodes_[i] - nodes_[j]).norm());
    }
  }
  return best;
}

bool RootTuple::all_finite() const {
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [](const ComplexVector& v) { return v.allFinite(); });
}

VandermondeMatrix build_vandermonde(const BasisSet& basis, const RootTuple& z,
                                    EvaluationCounters* counters) {
  const std::size_t k = z.size();
  const std::size_t m = basis.size();
  if (m < k) {
    throw DimensionMismatch("build_vandermonde: basis has " + std::to_string(m) +
                            " elements but there are " + std::to_string(k) + " nodes");
  }
  if (basis.variables() != z.variables()) {
    throw DimensionMismatch("build_vandermonde: basis and nodes differ in dimension");
  }
  VandermondeMatrix v{ComplexMatrix(static_cast<Index>(k), static_cast<Index>(m))};
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      v.matrix(static_cast<Index>(i), static_cast<Index>(j)) = basis.elements[j]->value(z.node(i));
    }
  }
  if (counters) counters->basis_evaluations += k * m;
  return v;
}

ComplexMatrix gram_matrix(const VandermondeMatrix& v) { return v.matrix * v.matrix.adjoint(); }

Complex LagrangeCoefficients::evaluate(const BasisSet& basis, std::size_t i,
                                       const ComplexVector& x) const {
  Complex sum = 0.0;
  for (std::size_t b = 0; b < basis.size(); ++b) {
    sum += coefficients(static_cast<Index>(b), static_cast<Index>(i)) * basis.elements[b]->value(x);
  }
  return sum;
}

LagrangeCoefficients lagrange_coefficients(const VandermondeMatrix& v, double rank_tol) {
  auto pinv = linalg::pseudoinverse(v.matrix, rank_tol);
  if (pinv.rank < v.matrix.rows()) {
    throw RankDeficient("Vandermonde matrix has rank " + std::to_string(pinv.rank) + " < k = " +
                        std::to_string(v.matrix.rows()));
  }
  return {std::move(pinv.matrix)};
}

LagrangeCoefficients lagrange_coefficients(const VandermondeMatrix& v) {
  return lagrange_coefficients(v, linalg::default_rank_tol(v.matrix.rows(), v.matrix.cols()));
}

ComplexVector min_norm_coefficients(const VandermondeMatrix& v, const ComplexVector& values) {
  if (values.size() != v.matrix.rows()) {
    throw DimensionMismatch("min_norm_coefficients: one value per node required");
  }
  return lagrange_coefficients(v).coefficients * values;
}

BasisExpansion min_norm_interpolant(const AnalyticFunction& f, const BasisSet& basis,
                                    const RootTuple& z) {
  const auto v = build_vandermonde(basis, z);
  ComplexVector values(static_cast<Index>(z.size()));
  for (std::size_t i = 0; i < z.size(); ++i) values(static_cast<Index>(i)) = evaluate(f, z.node(i));
  return BasisExpansion(basis, min_norm_coefficients(v, values));
}

double interpolant_norm_sq(const ComplexVector& values, const ComplexMatrix& gram) {
  if (values.size() != gram.rows()) {
    throw DimensionMismatch("interpolant_norm_sq: value count does not match Gram matrix");
  }
  if (values.isZero(0.0)) return 0.0;
  const ComplexVector solved = linalg::solve_hermitian(gram, values);
  return std::max(0.0, values.dot(solved).real());
}

}  // namespace ncs
