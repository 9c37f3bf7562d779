#pragma once

// Random instances and independent reference computations shared by the unit
// tests and the acceptance binary. Nothing here calls the code under test for
// the quantity being checked.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ncs/functions.hpp"
#include "ncs/interpolation.hpp"
#include "ncs/weierstrass.hpp"

namespace testing_support {

using ncs::BasisSet;
using ncs::Complex;
using ncs::ComplexMatrix;
using ncs::ComplexVector;
using ncs::ExponentVector;
using ncs::FunctionPtr;
using ncs::Index;
using ncs::RealVector;
using ncs::RootTuple;
using ncs::SparsePolynomial;
using ncs::SystemInstance;

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline Complex random_complex(Rng& rng, double radius = 1.0) {
  return {uniform(rng, -radius, radius), uniform(rng, -radius, radius)};
}

/// Uniform in the unit disk.
inline Complex random_in_disk(Rng& rng) {
  const double r = std::sqrt(uniform(rng, 0.0, 1.0));
  const double t = uniform(rng, 0.0, 2.0 * M_PI);
  return std::polar(r, t);
}

inline ComplexMatrix random_matrix(Rng& rng, Index rows, Index cols) {
  ComplexMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = random_complex(rng);
  return m;
}

inline RootTuple random_nodes(Rng& rng, std::size_t k, std::size_t n, double radius = 1.0) {
  std::vector<ComplexVector> nodes;
  for (std::size_t i = 0; i < k; ++i) {
    ComplexVector v(static_cast<Index>(n));
    for (std::size_t j = 0; j < n; ++j) v(static_cast<Index>(j)) = radius * random_in_disk(rng);
    nodes.push_back(v);
  }
  return RootTuple(std::move(nodes));
}

/// Dense random polynomial of total degree <= degree.
inline SparsePolynomial random_polynomial(Rng& rng, std::size_t n, unsigned degree, double scale = 1.0) {
  SparsePolynomial p(n);
  for (const auto& e : ncs::monomials_up_to_degree(n, degree)) p.add_term(e, scale * random_complex(rng));
  return p;
}

/// m distinct monomials of degree <= degree, always including 1.
inline std::vector<ExponentVector> random_monomial_support(Rng& rng, std::size_t n, unsigned degree,
                                                           std::size_t m) {
  auto all = ncs::monomials_up_to_degree(n, degree);
  std::vector<ExponentVector> out{all.front()};
  std::vector<ExponentVector> rest(all.begin() + 1, all.end());
  std::shuffle(rest.begin(), rest.end(), rng);
  for (std::size_t i = 0; out.size() < m && i < rest.size(); ++i) out.push_back(rest[i]);
  return out;
}

struct RandomSystem {
  std::vector<SparsePolynomial> polys;
  SystemInstance system;
};

/// N random polynomials; bases are random monomial supports of size m >= k.
inline RandomSystem random_system(Rng& rng, std::size_t big_n, std::size_t n, std::size_t k,
                                  unsigned degree, std::size_t m) {
  std::vector<SparsePolynomial> polys;
  std::vector<FunctionPtr> fs;
  std::vector<BasisSet> bases;
  for (std::size_t t = 0; t < big_n; ++t) {
    polys.push_back(random_polynomial(rng, n, degree));
    fs.push_back(std::make_shared<SparsePolynomial>(polys.back()));
    bases.push_back(BasisSet::from_monomials(random_monomial_support(rng, n, degree + 1, m)));
  }
  return {polys, SystemInstance(fs, bases, k)};
}

/// N polynomials that all vanish at the given nodes: random polynomials minus
/// their unique interpolant in a square monomial basis, solved by LU here.
inline RandomSystem consistent_system(Rng& rng, std::size_t big_n, const RootTuple& roots,
                                      unsigned degree) {
  const std::size_t n = roots.variables();
  const std::size_t k = roots.size();
  const auto square = ncs::graded_lex_monomials(n, k);
  ComplexMatrix v(static_cast<Index>(k), static_cast<Index>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t b = 0; b < k; ++b)
      v(static_cast<Index>(i), static_cast<Index>(b)) =
          SparsePolynomial::monomial(square[b]).value(roots.node(i));
  const Eigen::PartialPivLU<ComplexMatrix> lu(v);

  std::vector<SparsePolynomial> polys;
  std::vector<FunctionPtr> fs;
  for (std::size_t t = 0; t < big_n; ++t) {
    SparsePolynomial p = random_polynomial(rng, n, degree);
    ComplexVector vals(static_cast<Index>(k));
    for (std::size_t i = 0; i < k; ++i) vals(static_cast<Index>(i)) = p.value(roots.node(i));
    const ComplexVector c = lu.solve(vals);
    for (std::size_t b = 0; b < k; ++b) p.add_term(square[b], -c(static_cast<Index>(b)));
    polys.push_back(p);
    fs.push_back(std::make_shared<SparsePolynomial>(p));
  }
  return {polys, SystemInstance(fs, std::vector<BasisSet>(big_n, ncs::smallest_degree_basis(n, k)), k)};
}

/// Pseudoinverse through Eigen's complete orthogonal decomposition, a route
/// separate from the SVD used by the library.
inline ComplexMatrix reference_pinv(const ComplexMatrix& m) {
  return Eigen::CompleteOrthogonalDecomposition<ComplexMatrix>(m).pseudoInverse();
}

inline ComplexMatrix reference_vandermonde(const BasisSet& basis, const RootTuple& z) {
  ComplexMatrix v(static_cast<Index>(z.size()), static_cast<Index>(basis.size()));
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t b = 0; b < basis.size(); ++b)
      v(static_cast<Index>(i), static_cast<Index>(b)) = basis.elements[b]->value(z.node(i));
  return v;
}

/// Stacked W(z) from V^dagger f per block.
inline ComplexVector reference_w(const SystemInstance& sys, const RootTuple& z) {
  std::vector<ComplexVector> blocks;
  Index total = 0;
  for (std::size_t t = 0; t < sys.equations(); ++t) {
    const ComplexMatrix v = reference_vandermonde(sys.basis(t), z);
    ComplexVector f(static_cast<Index>(z.size()));
    for (std::size_t i = 0; i < z.size(); ++i) f(static_cast<Index>(i)) = sys.function(t).value(z.node(i));
    blocks.push_back(reference_pinv(v) * f);
    total += blocks.back().size();
  }
  ComplexVector out(total);
  Index off = 0;
  for (const auto& b : blocks) {
    out.segment(off, b.size()) = b;
    off += b.size();
  }
  return out;
}

/// Dense J = V^dagger (grad F - (grad V) W), materializing every slice of
/// grad V instead of exploiting its one-row structure.
inline ComplexMatrix reference_jacobian(const SystemInstance& sys, const RootTuple& z) {
  const std::size_t n = sys.variables();
  const std::size_t k = sys.roots();
  std::vector<ComplexMatrix> blocks;
  Index rows = 0;
  for (std::size_t t = 0; t < sys.equations(); ++t) {
    const auto& basis = sys.basis(t);
    const ComplexMatrix v = reference_vandermonde(basis, z);
    const ComplexMatrix pinv = reference_pinv(v);
    ComplexVector f(static_cast<Index>(k));
    for (std::size_t i = 0; i < k; ++i) f(static_cast<Index>(i)) = sys.function(t).value(z.node(i));
    const ComplexVector w = pinv * f;
    ComplexMatrix block(static_cast<Index>(basis.size()), static_cast<Index>(n * k));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        ComplexVector d_f = ComplexVector::Zero(static_cast<Index>(k));
        d_f(static_cast<Index>(i)) = sys.function(t).gradient(z.node(i))(static_cast<Index>(j));
        ComplexMatrix d_v = ComplexMatrix::Zero(static_cast<Index>(k), static_cast<Index>(basis.size()));
        for (std::size_t b = 0; b < basis.size(); ++b)
          d_v(static_cast<Index>(i), static_cast<Index>(b)) =
              basis.elements[b]->gradient(z.node(i))(static_cast<Index>(j));
        block.col(static_cast<Index>(i * n + j)) = pinv * (d_f - d_v * w);
      }
    }
    rows += block.rows();
    blocks.push_back(block);
  }
  ComplexMatrix out(rows, static_cast<Index>(n * k));
  Index off = 0;
  for (const auto& b : blocks) {
    out.middleRows(off, b.rows()) = b;
    off += b.rows();
  }
  return out;
}

/// The Gauss-Newton step is well posed when J has full column rank. Random
/// draws occasionally put f in span(B), which makes f - p vanish and J zero.
/// Instances here are unit scale, so an absolute floor on sigma_min is used.
inline bool gauss_newton_well_posed(const SystemInstance& sys, const RootTuple& z, double max_cond = 1e8) {
  const Eigen::JacobiSVD<ComplexMatrix> svd(reference_jacobian(sys, z));
  const auto& s = svd.singularValues();
  return s.size() > 0 && s(s.size() - 1) > 1e-8 && s(0) / s(s.size() - 1) <= max_cond;
}

/// Gauss-Newton step z - J^dagger W.
inline RootTuple reference_gn_step(const SystemInstance& sys, const RootTuple& z) {
  const ComplexMatrix j = reference_jacobian(sys, z);
  const ComplexVector w = reference_w(sys, z);
  return RootTuple::from_flat(z.flat() - reference_pinv(j) * w, z.variables());
}

/// ||W(z)||^2 in the [Re z; Im z] real layout.
inline double objective_at(const SystemInstance& sys, const RootTuple& z0, const RealVector& x) {
  return reference_w(sys, RootTuple::from_flat(ncs::from_real(x), z0.variables())).squaredNorm();
}

inline RealVector fd_real_gradient(const SystemInstance& sys, const RootTuple& z, double h) {
  const RealVector x = ncs::to_real(z.flat());
  RealVector g(x.size());
  for (Index c = 0; c < x.size(); ++c) {
    RealVector xp = x, xm = x;
    xp(c) += h;
    xm(c) -= h;
    g(c) = (objective_at(sys, z, xp) - objective_at(sys, z, xm)) / (2.0 * h);
  }
  return g;
}

template <class A, class B>
double relative_error(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

}  // namespace testing_support
