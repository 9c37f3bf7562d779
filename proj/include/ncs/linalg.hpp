#pragma once

// Dense complex linear algebra used by every other module. Thin, checked
// wrappers around Eigen factorizations.

#include <complex>

#include <Eigen/Dense>

namespace ncs {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace linalg {

/// Relative singular-value cutoff max(rows, cols) * epsilon.
double default_rank_tol(Index rows, Index cols);

/// Throws NonFiniteValue if any entry is NaN or infinite.
void require_finite(const ComplexMatrix& m, const char* what);

struct SvdFactorization {
  ComplexMatrix left;
  RealVector singular_values;  // nonincreasing
  ComplexMatrix right;
  Index rank = 0;  // count of singular values > rank_tol * sigma_max
};

SvdFactorization svd(const ComplexMatrix& m, double rank_tol);

struct Pseudoinverse {
  ComplexMatrix matrix;
  Index rank = 0;
};

/// Moore-Penrose pseudoinverse. Singular values <= rank_tol * sigma_max are
/// treated as zero.
Pseudoinverse pseudoinverse(const ComplexMatrix& m, double rank_tol);
Pseudoinverse pseudoinverse(const ComplexMatrix& m);

/// Solves m x = rhs for Hermitian m using Cholesky, falling back to a
/// pivoted LDL^T. Throws SingularMatrix when m is numerically rank deficient.
ComplexVector solve_hermitian(const ComplexMatrix& m, const ComplexVector& rhs);
ComplexMatrix solve_hermitian(const ComplexMatrix& m, const ComplexMatrix& rhs);

struct HermitianEigen {
  RealVector eigenvalues;  // ascending
  ComplexMatrix eigenvectors;
};

/// Throws NotHermitian when ||m - m^*|| > 1e-12 ||m||.
HermitianEigen eig_hermitian(const ComplexMatrix& m);

struct SymmetricEigen {
  RealVector eigenvalues;  // ascending
  RealMatrix eigenvectors;
};

SymmetricEigen eig_symmetric(const RealMatrix& m);

}  // namespace linalg
}  // namespace ncs
