#include <doctest.h>

#include "ncs/errors.hpp"
#include "ncs/linalg.hpp"
#include "support.hpp"

using namespace ncs;
using testing_support::random_matrix;
using testing_support::Rng;

namespace {

ComplexMatrix cm(std::initializer_list<std::initializer_list<double>> rows) {
  ComplexMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

ComplexVector ones(Index n) { return ComplexVector::Ones(n); }

}  // namespace

TEST_CASE("pseudoinverse of small matrices") {
  CHECK((linalg::pseudoinverse(ComplexMatrix::Identity(3, 3)).matrix - ComplexMatrix::Identity(3, 3)).norm() <
        1e-14);

  const auto row = linalg::pseudoinverse(cm({{1, 1}}));
  CHECK(row.rank == 1);
  CHECK((row.matrix - cm({{0.5}, {0.5}})).norm() < 1e-14);

  const auto sq = linalg::pseudoinverse(cm({{1, 0}, {1, 1}}));
  CHECK((sq.matrix - cm({{1, 0}, {-1, 1}})).norm() < 1e-14);
}

TEST_CASE("pseudoinverse satisfies the Moore-Penrose conditions") {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const Index rows = static_cast<Index>(testing_support::pick(rng, 1, 20));
    const Index cols = static_cast<Index>(testing_support::pick(rng, 1, 20));
    ComplexMatrix m = random_matrix(rng, rows, cols);
    if (trial % 3 == 0 && rows > 1 && cols > 1) {
      // Force a rank drop by repeating a row.
      m.row(rows - 1) = m.row(0);
    }
    const ComplexMatrix p = linalg::pseudoinverse(m).matrix;
    CHECK((m * p * m - m).norm() <= 1e-9 * m.norm());
    CHECK((p * m * p - p).norm() <= 1e-9 * p.norm());
    const ComplexMatrix mp = m * p, pm = p * m;
    CHECK((mp - mp.adjoint()).norm() <= 1e-9);
    CHECK((pm - pm.adjoint()).norm() <= 1e-9);
  }
}

TEST_CASE("pseudoinverse product identity for full row rank") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const Index rows = static_cast<Index>(testing_support::pick(rng, 1, 6));
    const Index cols = rows + static_cast<Index>(testing_support::pick(rng, 0, 6));
    const ComplexMatrix m = random_matrix(rng, rows, cols);
    const ComplexMatrix p = linalg::pseudoinverse(m).matrix;
    const ComplexMatrix lhs = p.adjoint() * p;
    const ComplexMatrix rhs = (m * m.adjoint()).inverse();
    CHECK((lhs - rhs).norm() <= 1e-9 * rhs.norm());
  }
}

TEST_CASE("svd reports sorted values and numerical rank") {
  const auto s = linalg::svd(cm({{3, 0, 0}, {0, 1, 0}, {0, 0, 0}}), 1e-12);
  CHECK(s.rank == 2);
  CHECK(s.singular_values(0) == doctest::Approx(3.0));
  CHECK(s.singular_values(1) == doctest::Approx(1.0));
  CHECK(s.singular_values(2) == doctest::Approx(0.0));
  CHECK_THROWS_AS(linalg::svd(ComplexMatrix(0, 0), 1e-12), InvalidArgument);
  CHECK_THROWS_AS(linalg::svd(cm({{1}}), 0.0), InvalidArgument);
}

TEST_CASE("solve_hermitian") {
  const ComplexVector x = linalg::solve_hermitian(cm({{3, 1}, {1, 3}}), ones(2));
  CHECK(std::abs(x(0) - 0.25) < 1e-14);
  CHECK(std::abs(x(1) - 0.25) < 1e-14);

  ComplexVector v(3);
  v << Complex(1, 2), Complex(-1, 0), Complex(0, 3);
  CHECK((linalg::solve_hermitian(ComplexMatrix::Identity(3, 3), v) - v).norm() < 1e-15);

  CHECK_THROWS_AS(linalg::solve_hermitian(cm({{1, 1}, {1, 1}}), ones(2)), SingularMatrix);
  CHECK_THROWS_AS(linalg::solve_hermitian(cm({{1, 0}, {0, 1}}), ones(3)), DimensionMismatch);
}

TEST_CASE("solve_hermitian handles indefinite matrices") {
  const ComplexVector x = linalg::solve_hermitian(cm({{0, 1}, {1, 0}}), ones(2));
  CHECK(std::abs(x(0) - 1.0) < 1e-14);
  CHECK(std::abs(x(1) - 1.0) < 1e-14);
}

TEST_CASE("solve_hermitian agrees with the pseudoinverse") {
  Rng rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const Index d = static_cast<Index>(testing_support::pick(rng, 1, 8));
    const ComplexMatrix a = random_matrix(rng, d, d + 2);
    const ComplexMatrix m = a * a.adjoint();
    const ComplexVector rhs = random_matrix(rng, d, 1);
    const ComplexVector x = linalg::solve_hermitian(m, rhs);
    CHECK((m * x - rhs).norm() <= 1e-10 * rhs.norm());
    CHECK(testing_support::relative_error(x, linalg::pseudoinverse(m).matrix * rhs) <= 1e-9);
  }
}

TEST_CASE("eig_hermitian") {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = -1.0;
  auto e = linalg::eig_hermitian(d);
  CHECK(e.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(e.eigenvalues(1) == doctest::Approx(2.0));

  e = linalg::eig_hermitian(cm({{0, 1}, {1, 0}}));
  CHECK(e.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(e.eigenvalues(1) == doctest::Approx(1.0));

  e = linalg::eig_hermitian(ComplexMatrix::Identity(4, 4));
  for (Index i = 0; i < 4; ++i) CHECK(e.eigenvalues(i) == doctest::Approx(1.0));

  CHECK_THROWS_AS(linalg::eig_hermitian(cm({{0, 1}, {0, 0}})), NotHermitian);

  Rng rng(14);
  const ComplexMatrix a = random_matrix(rng, 6, 6);
  const ComplexMatrix h = a + a.adjoint();
  e = linalg::eig_hermitian(h);
  const ComplexMatrix residual = h * e.eigenvectors - e.eigenvectors * e.eigenvalues.cast<Complex>().asDiagonal();
  CHECK(residual.norm() <= 1e-9 * h.norm());
  for (Index i = 1; i < 6; ++i) CHECK(e.eigenvalues(i - 1) <= e.eigenvalues(i));
}

TEST_CASE("non-finite input is rejected") {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(linalg::pseudoinverse(m), NonFiniteValue);
}
