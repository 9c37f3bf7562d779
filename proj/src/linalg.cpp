#include "ncs/linalg.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "ncs/errors.hpp"

namespace ncs::linalg {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch(std::string(what) + ": matrix must be square");
  }
}

// Pivot ratio below which a symmetric factorization is declared singular.
double pivot_floor(Index dim) { return static_cast<double>(dim) * kEps; }

template <typename Rhs>
Rhs solve_hermitian_impl(const ComplexMatrix& m, const Rhs& rhs) {
  require_square(m, "solve_hermitian");
  if (m.rows() != rhs.rows()) {
    throw DimensionMismatch("solve_hermitian: rhs length does not match matrix");
  }
  if (m.rows() == 0) {
    throw InvalidArgument("solve_hermitian: empty matrix");
  }
  require_finite(m, "solve_hermitian");

  const Index dim = m.rows();
  Eigen::LLT<ComplexMatrix> llt(m);
  if (llt.info() == Eigen::Success) {
    const RealVector diag = llt.matrixL().toDenseMatrix().diagonal().real();
    const double lo = diag.minCoeff();
    const double hi = diag.maxCoeff();
    if (lo * lo > pivot_floor(dim) * hi * hi) {
      return llt.solve(rhs);
    }
    throw SingularMatrix("solve_hermitian: matrix is numerically singular");
  }

  // Indefinite: diagonal-pivoted LDLT breaks down on matrices such as
  // [[0, 1], [1, 0]], so fall back to the eigendecomposition.
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m);
  const RealVector& lambda = eig.eigenvalues();
  const double lmax = lambda.cwiseAbs().maxCoeff();
  if (eig.info() != Eigen::Success || lmax == 0.0 || lambda.cwiseAbs().minCoeff() <= pivot_floor(dim) * lmax) {
    throw SingularMatrix("solve_hermitian: matrix is numerically singular");
  }
  const ComplexMatrix& q = eig.eigenvectors();
  return Rhs(q * (lambda.cwiseInverse().cast<Complex>().asDiagonal() * (q.adjoint() * rhs)));
}

}  // namespace

double default_rank_tol(Index rows, Index cols) {
  return static_cast<double>(std::max<Index>({rows, cols, 1})) * kEps;
}

void require_finite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NonFiniteValue(std::string(what) + ": non-finite entry");
  }
}

SvdFactorization svd(const ComplexMatrix& m, double rank_tol) {
  if (m.size() == 0) {
    throw InvalidArgument("svd: empty matrix");
  }
  if (!(rank_tol > 0.0)) {
    throw InvalidArgument("svd: rank tolerance must be positive");
  }
  require_finite(m, "svd");

  Eigen::JacobiSVD<ComplexMatrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactorization out;
  out.left = solver.matrixU();
  out.singular_values = solver.singularValues();
  out.right = solver.matrixV();
  const double cutoff = rank_tol * out.singular_values(0);
  out.rank = 0;
  for (Index i = 0; i < out.singular_values.size(); ++i) {
    if (out.singular_values(i) > cutoff) ++out.rank;
  }
  return out;
}

Pseudoinverse pseudoinverse(const ComplexMatrix& m, double rank_tol) {
  const SvdFactorization f = svd(m, rank_tol);
  Pseudoinverse out;
  out.rank = f.rank;
  out.matrix = ComplexMatrix::Zero(m.cols(), m.rows());
  for (Index i = 0; i < f.rank; ++i) {
    out.matrix.noalias() += (f.right.col(i) / f.singular_values(i)) * f.left.col(i).adjoint();
  }
  return out;
}

Pseudoinverse pseudoinverse(const ComplexMatrix& m) {
  return pseudoinverse(m, default_rank_tol(m.rows(), m.cols()));
}

ComplexVector solve_hermitian(const ComplexMatrix& m, const ComplexVector& rhs) {
  return solve_hermitian_impl(m, rhs);
}

ComplexMatrix solve_hermitian(const ComplexMatrix& m, const ComplexMatrix& rhs) {
  return solve_hermitian_impl(m, rhs);
}

HermitianEigen eig_hermitian(const ComplexMatrix& m) {
  require_square(m, "eig_hermitian");
  require_finite(m, "eig_hermitian");
  const double scale = m.norm();
  if ((m - m.adjoint()).norm() > 1e-12 * scale) {
    throw NotHermitian("eig_hermitian: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

SymmetricEigen eig_symmetric(const RealMatrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("eig_symmetric: matrix must be square");
  }
  if (!m.allFinite()) {
    throw NonFiniteValue("eig_symmetric: non-finite entry");
  }
  const double scale = m.norm();
  if ((m - m.transpose()).norm() > 1e-12 * scale) {
    throw NotHermitian("eig_symmetric: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(m);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace ncs::linalg
