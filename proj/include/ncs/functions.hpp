#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "ncs/linalg.hpp"

namespace ncs {

using ExponentVector = std::vector<unsigned>;

/// An analytic function C^n -> C evaluated as a black box. Derivatives are
/// holomorphic (ordinary complex) partials.
class AnalyticFunction {
 public:
  virtual ~AnalyticFunction() = default;

  virtual std::size_t variables() const = 0;
  virtual Complex value(const ComplexVector& x) const = 0;
  virtual ComplexVector gradient(const ComplexVector& x) const = 0;

  /// Second partials. The default differentiates gradient() by central
  /// differences with step eps^(1/3) * max(1, |x_j|).
  virtual ComplexMatrix hessian(const ComplexVector& x) const;

  virtual bool has_exact_hessian() const { return false; }
};

using FunctionPtr = std::shared_ptr<const AnalyticFunction>;

/// Checked entry points: throw DimensionMismatch on bad point length or
/// variable index (0-based).
Complex evaluate(const AnalyticFunction& f, const ComplexVector& point);
Complex partial(const AnalyticFunction& f, std::size_t j, const ComplexVector& point);

/// Sparse multivariate polynomial with complex coefficients. Never stores a
/// zero coefficient.
class SparsePolynomial final : public AnalyticFunction {
 public:
  using Terms = std::map<ExponentVector, Complex>;

  explicit SparsePolynomial(std::size_t variables);
  SparsePolynomial(std::size_t variables, const Terms& terms);

  static SparsePolynomial monomial(const ExponentVector& exponents, Complex coefficient = 1.0);
  static SparsePolynomial constant(std::size_t variables, Complex c);

  std::size_t variables() const override { return variables_; }
  Complex value(const ComplexVector& x) const override;
  ComplexVector gradient(const ComplexVector& x) const override;
  ComplexMatrix hessian(const ComplexVector& x) const override;
  bool has_exact_hessian() const override { return true; }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  Complex coefficient(const ExponentVector& e) const;
  unsigned total_degree() const;
  double max_abs_coefficient() const;

  /// Adds c to the coefficient of x^e, dropping the term if it cancels.
  void add_term(const ExponentVector& e, Complex c);

  SparsePolynomial& operator+=(const SparsePolynomial& other);
  SparsePolynomial& operator-=(const SparsePolynomial& other);
  SparsePolynomial& operator*=(Complex c);

  friend SparsePolynomial operator+(SparsePolynomial a, const SparsePolynomial& b) { return a += b; }
  friend SparsePolynomial operator-(SparsePolynomial a, const SparsePolynomial& b) { return a -= b; }
  friend SparsePolynomial operator*(SparsePolynomial a, Complex c) { return a *= c; }
  friend bool operator==(const SparsePolynomial& a, const SparsePolynomial& b) {
    return a.variables_ == b.variables_ && a.terms_ == b.terms_;
  }

 private:
  void require_point(const ComplexVector& x) const;
  // powers[j][e] = x_j^e for e up to the largest exponent of variable j.
  std::vector<std::vector<Complex>> power_table(const ComplexVector& x) const;

  std::size_t variables_;
  Terms terms_;
};

/// Black-box function assembled from callables.
class BlackBoxFunction final : public AnalyticFunction {
 public:
  using ValueFn = std::function<Complex(const ComplexVector&)>;
  using GradientFn = std::function<ComplexVector(const ComplexVector&)>;
  using HessianFn = std::function<ComplexMatrix(const ComplexVector&)>;

  BlackBoxFunction(std::size_t variables, ValueFn value, GradientFn gradient,
                   HessianFn hessian = nullptr);

  std::size_t variables() const override { return variables_; }
  Complex value(const ComplexVector& x) const override { return value_(x); }
  ComplexVector gradient(const ComplexVector& x) const override { return gradient_(x); }
  ComplexMatrix hessian(const ComplexVector& x) const override;
  bool has_exact_hessian() const override { return static_cast<bool>(hessian_); }

 private:
  std::size_t variables_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
};

/// Ordered perturbation basis B = {b_1, ..., b_m}.
struct BasisSet {
  std::vector<FunctionPtr> elements;

  std::size_t size() const { return elements.size(); }
  std::size_t variables() const;
  bool all_exact_hessians() const;
  /// Exponent vectors when every element is a monic monomial.
  std::optional<std::vector<ExponentVector>> monomial_exponents() const;

  static BasisSet from_monomials(const std::vector<ExponentVector>& exponents);
};

/// The first `count` monomials in n variables in graded lexicographic order
/// (degree ascending, x_1 > x_2 > ... within a degree).
std::vector<ExponentVector> graded_lex_monomials(std::size_t n, std::size_t count);

/// All monomials of total degree <= degree, graded lexicographic order.
std::vector<ExponentVector> monomials_up_to_degree(std::size_t n, unsigned degree);

BasisSet smallest_degree_basis(std::size_t n, std::size_t k);

/// Element of span(B) given by its coefficient vector.
class BasisExpansion final : public AnalyticFunction {
 public:
  BasisExpansion(BasisSet basis, ComplexVector coefficients);

  std::size_t variables() const override { return basis_.variables(); }
  Complex value(const ComplexVector& x) const override;
  ComplexVector gradient(const ComplexVector& x) const override;
  ComplexMatrix hessian(const ComplexVector& x) const override;
  bool has_exact_hessian() const override { return basis_.all_exact_hessians(); }

  const BasisSet& basis() const { return basis_; }
  const ComplexVector& coefficients() const { return coefficients_; }
  double norm() const { return coefficients_.norm(); }

  /// Expanded polynomial when every basis element is a SparsePolynomial.
  std::optional<SparsePolynomial> as_polynomial() const;

 private:
  BasisSet basis_;
  ComplexVector coefficients_;
};

/// f - p evaluated pointwise; used when f is not a polynomial.
class DifferenceFunction final : public AnalyticFunction {
 public:
  DifferenceFunction(FunctionPtr f, FunctionPtr p);

  std::size_t variables() const override { return f_->variables(); }
  Complex value(const ComplexVector& x) const override { return f_->value(x) - p_->value(x); }
  ComplexVector gradient(const ComplexVector& x) const override {
    return f_->gradient(x) - p_->gradient(x);
  }
  ComplexMatrix hessian(const ComplexVector& x) const override {
    return f_->hessian(x) - p_->hessian(x);
  }
  bool has_exact_hessian() const override {
    return f_->has_exact_hessian() && p_->has_exact_hessian();
  }

 private:
  FunctionPtr f_;
  FunctionPtr p_;
};

/// f - p. Exact term-wise subtraction whenever both sides are polynomials.
FunctionPtr subtract_perturbation(const FunctionPtr& f, const SparsePolynomial& p);
FunctionPtr subtract_perturbation(const FunctionPtr& f, const FunctionPtr& p);

/// The over-constrained input (f_1..f_N, B_1..B_N, k).
class SystemInstance {
 public:
  SystemInstance(std::vector<FunctionPtr> functions, std::vector<BasisSet> bases, std::size_t k);

  std::size_t equations() const { return functions_.size(); }
  std::size_t variables() const { return variables_; }
  std::size_t roots() const { return k_; }

  const std::vector<FunctionPtr>& functions() const { return functions_; }
  const std::vector<BasisSet>& bases() const { return bases_; }
  const AnalyticFunction& function(std::size_t i) const { return *functions_[i]; }
  const BasisSet& basis(std::size_t i) const { return bases_[i]; }

  /// 1 + largest coefficient magnitude over polynomial inputs (1 otherwise).
  double scale() const;
  bool all_exact_hessians() const;

 private:
  std::vector<FunctionPtr> functions_;
  std::vector<BasisSet> bases_;
  std::size_t k_;
  std::size_t variables_;
};

}  // namespace ncs
