#include "ncs/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ncs/errors.hpp"

namespace ncs {

namespace {

void require_length(const ComplexVector& x, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(x.size()) != n) {
    throw DimensionMismatch(std::string(what) + ": point has " + std::to_string(x.size()) +
                            " coordinates, expected " + std::to_string(n));
  }
}

// Visits every exponent vector of total degree exactly `degree` in n
// variables, lexicographically descending (x_1 highest).
template <typename Visit>
void for_each_of_degree(std::size_t n, unsigned degree, ExponentVector& current, std::size_t pos,
                        Visit&& visit) {
  if (pos + 1 == n) {
    current[pos] = degree;
    visit(current);
    return;
  }
  for (unsigned e = degree + 1; e-- > 0;) {
    current[pos] = e;
    for_each_of_degree(n, degree - e, current, pos + 1, visit);
  }
  current[pos] = 0;
}

}  // namespace

ComplexMatrix AnalyticFunction::hessian(const ComplexVector& x) const {
  const Index n = x.size();
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  ComplexMatrix h(n, n);
  for (Index j = 0; j < n; ++j) {
    const double step = base * std::max(1.0, std::abs(x(j)));
    ComplexVector plus = x;
    ComplexVector minus = x;
    plus(j) += step;
    minus(j) -= step;
    h.col(j) = (gradient(plus) - gradient(minus)) / (2.0 * step);
  }
  return (h + h.transpose()) / 2.0;
}

Complex evaluate(const AnalyticFunction& f, const ComplexVector& point) {
  require_length(point, f.variables(), "evaluate");
  return f.value(point);
}

Complex partial(const AnalyticFunction& f, std::size_t j, const ComplexVector& point) {
  require_length(point, f.variables(), "partial");
  if (j >= f.variables()) {
    throw DimensionMismatch("partial: variable index " + std::to_string(j) + " out of range");
  }
  return f.gradient(point)(static_cast<Index>(j));
}

// --- SparsePolynomial -------------------------------------------------------

SparsePolynomial::SparsePolynomial(std::size_t variables) : variables_(variables) {}

SparsePolynomial::SparsePolynomial(std::size_t variables, const Terms& terms)
    : variables_(variables) {
  for (const auto& [e, c] : terms) add_term(e, c);
}

SparsePolynomial SparsePolynomial::monomial(const ExponentVector& exponents, Complex coefficient) {
  SparsePolynomial p(exponents.size());
  p.add_term(exponents, coefficient);
  return p;
}

SparsePolynomial SparsePolynomial::constant(std::size_t variables, Complex c) {
  SparsePolynomial p(variables);
  p.add_term(ExponentVector(variables, 0), c);
  return p;
}

void SparsePolynomial::add_term(const ExponentVector& e, Complex c) {
  if (e.size() != variables_) {
    throw DimensionMismatch("SparsePolynomial: exponent vector of length " +
                            std::to_string(e.size()) + " in a polynomial of " +
                            std::to_string(variables_) + " variables");
  }
  if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
    throw NonFiniteValue("SparsePolynomial: non-finite coefficient");
  }
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    if (c != Complex(0.0)) terms_.emplace(e, c);
    return;
  }
  it->second += c;
  if (it->second == Complex(0.0)) terms_.erase(it);
}

Complex SparsePolynomial::coefficient(const ExponentVector& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? Complex(0.0) : it->second;
}

unsigned SparsePolynomial::total_degree() const {
  unsigned best = 0;
  for (const auto& [e, c] : terms_) {
    unsigned d = 0;
    for (unsigned v : e) d += v;
    best = std::max(best, d);
  }
  return best;
}

double SparsePolynomial::max_abs_coefficient() const {
  double best = 0.0;
  for (const auto& [e, c] : terms_) best = std::max(best, std::abs(c));
  return best;
}

SparsePolynomial& SparsePolynomial::operator+=(const SparsePolynomial& other) {
  if (other.variables_ != variables_) throw DimensionMismatch("SparsePolynomial: variable count");
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

SparsePolynomial& SparsePolynomial::operator-=(const SparsePolynomial& other) {
  if (other.variables_ != variables_) throw DimensionMismatch("SparsePolynomial: variable count");
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

SparsePolynomial& SparsePolynomial::operator*=(Complex c) {
  if (c == Complex(0.0)) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, coef] : terms_) coef *= c;
  return *this;
}

void SparsePolynomial::require_point(const ComplexVector& x) const {
  require_length(x, variables_, "SparsePolynomial");
}

std::vector<std::vector<Complex>> SparsePolynomial::power_table(const ComplexVector& x) const {
  std::vector<unsigned> top(variables_, 0);
  for (const auto& [e, c] : terms_) {
    for (std::size_t j = 0; j < variables_; ++j) top[j] = std::max(top[j], e[j]);
  }
  std::vector<std::vector<Complex>> powers(variables_);
  for (std::size_t j = 0; j < variables_; ++j) {
    auto& row = powers[j];
    row.resize(top[j] + 1);
    row[0] = 1.0;
    for (std::size_t e = 1; e < row.size(); ++e) row[e] = row[e - 1] * x(static_cast<Index>(j));
  }
  return powers;
}

Complex SparsePolynomial::value(const ComplexVector& x) const {
  require_point(x);
  const auto powers = power_table(x);
  Complex sum = 0.0;
  for (const auto& [e, c] : terms_) {
    Complex term = c;
    for (std::size_t j = 0; j < variables_; ++j) term *= powers[j][e[j]];
    sum += term;
  }
  return sum;
}

ComplexVector SparsePolynomial::gradient(const ComplexVector& x) const {
  require_point(x);
  const auto powers = power_table(x);
  ComplexVector g = ComplexVector::Zero(static_cast<Index>(variables_));
  for (const auto& [e, c] : terms_) {
    for (std::size_t d = 0; d < variables_; ++d) {
      if (e[d] == 0) continue;
      Complex term = c * static_cast<double>(e[d]);
      for (std::size_t j = 0; j < variables_; ++j) {
        term *= powers[j][j == d ? e[j] - 1 : e[j]];
      }
      g(static_cast<Index>(d)) += term;
    }
  }
  return g;
}

ComplexMatrix SparsePolynomial::hessian(const ComplexVector& x) const {
  require_point(x);
  const auto powers = power_table(x);
  const auto n = static_cast<Index>(variables_);
  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  for (const auto& [e, c] : terms_) {
    for (std::size_t a = 0; a < variables_; ++a) {
      for (std::size_t b = a; b < variables_; ++b) {
        ExponentVector reduced = e;
        double factor = 1.0;
        if (reduced[a] == 0) continue;
        factor *= reduced[a]--;
        if (reduced[b] == 0) continue;
        factor *= reduced[b]--;
        Complex term = c * factor;
        for (std::size_t j = 0; j < variables_; ++j) term *= powers[j][reduced[j]];
        h(static_cast<Index>(a), static_cast<Index>(b)) += term;
      }
    }
  }
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) h(b, a) = h(a, b);
  }
  return h;
}

// --- BlackBoxFunction -------------------------------------------------------

BlackBoxFunction::BlackBoxFunction(std::size_t variables, ValueFn value, GradientFn gradient,
                                   HessianFn hessian)
    : variables_(variables),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)) {
  if (!value_ || !gradient_) {
    throw InvalidArgument("BlackBoxFunction: value and gradient are required");
  }
}

ComplexMatrix BlackBoxFunction::hessian(const ComplexVector& x) const {
  if (hessian_) return hessian_(x);
  return AnalyticFunction::hessian(x);
}

// --- BasisSet ---------------------------------------------------------------

std::size_t BasisSet::variables() const {
  return elements.empty() ? 0 : elements.front()->variables();
}

bool BasisSet::all_exact_hessians() const {
  return std::all_of(elements.begin(), elements.end(),
                     [](const FunctionPtr& b) { return b->has_exact_hessian(); });
}

std::optional<std::vector<ExponentVector>> BasisSet::monomial_exponents() const {
  std::vector<ExponentVector> out;
  out.reserve(elements.size());
  for (const auto& b : elements) {
    const auto* poly = dynamic_cast<const SparsePolynomial*>(b.get());
    if (poly == nullptr || poly->terms().size() != 1 ||
        poly->terms().begin()->second != Complex(1.0)) {
      return std::nullopt;
    }
    out.push_back(poly->terms().begin()->first);
  }
  return out;
}

BasisSet BasisSet::from_monomials(const std::vector<ExponentVector>& exponents) {
  BasisSet basis;
  basis.elements.reserve(exponents.size());
  for (const auto& e : exponents) {
    basis.elements.push_back(std::make_shared<SparsePolynomial>(SparsePolynomial::monomial(e)));
  }
  return basis;
}

std::vector<ExponentVector> graded_lex_monomials(std::size_t n, std::size_t count) {
  if (n == 0) throw InvalidArgument("graded_lex_monomials: need at least one variable");
  std::vector<ExponentVector> out;
  out.reserve(count);
  ExponentVector current(n, 0);
  for (unsigned degree = 0; out.size() < count; ++degree) {
    for_each_of_degree(n, degree, current, 0, [&](const ExponentVector& e) {
      if (out.size() < count) out.push_back(e);
    });
  }
  return out;
}

std::vector<ExponentVector> monomials_up_to_degree(std::size_t n, unsigned degree) {
  if (n == 0) throw InvalidArgument("monomials_up_to_degree: need at least one variable");
  std::vector<ExponentVector> out;
  ExponentVector current(n, 0);
  for (unsigned d = 0; d <= degree; ++d) {
    for_each_of_degree(n, d, current, 0, [&](const ExponentVector& e) { out.push_back(e); });
  }
  return out;
}

BasisSet smallest_degree_basis(std::size_t n, std::size_t k) {
  if (k == 0) throw InvalidArgument("smallest_degree_basis: k must be at least 1");
  return BasisSet::from_monomials(graded_lex_monomials(n, k));
}

// --- BasisExpansion ---------------------------------------------------------

BasisExpansion::BasisExpansion(BasisSet basis, ComplexVector coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
  if (static_cast<std::size_t>(coefficients_.size()) != basis_.size()) {
    throw DimensionMismatch("BasisExpansion: coefficient count does not match basis size");
  }
}

Complex BasisExpansion::value(const ComplexVector& x) const {
  Complex sum = 0.0;
  for (std::size_t b = 0; b < basis_.size(); ++b) {
    sum += coefficients_(static_cast<Index>(b)) * basis_.elements[b]->value(x);
  }
  return sum;
}

ComplexVector BasisExpansion::gradient(const ComplexVector& x) const {
  ComplexVector g = ComplexVector::Zero(x.size());
  for (std::size_t b = 0; b < basis_.size(); ++b) {
    g += coefficients_(static_cast<Index>(b)) * basis_.elements[b]->gradient(x);
  }
  return g;
}

ComplexMatrix BasisExpansion::hessian(const ComplexVector& x) const {
  ComplexMatrix h = ComplexMatrix::Zero(x.size(), x.size());
  for (std::size_t b = 0; b < basis_.size(); ++b) {
    h += coefficients_(static_cast<Index>(b)) * basis_.elements[b]->hessian(x);
  }
  return h;
}

std::optional<SparsePolynomial> BasisExpansion::as_polynomial() const {
  SparsePolynomial out(basis_.variables());
  for (std::size_t b = 0; b < basis_.size(); ++b) {
    const auto* poly = dynamic_cast<const SparsePolynomial*>(basis_.elements[b].get());
    if (poly == nullptr) return std::nullopt;
    out += *poly * coefficients_(static_cast<Index>(b));
  }
  return out;
}

// --- Differences ------------------------------------------------------------

DifferenceFunction::DifferenceFunction(FunctionPtr f, FunctionPtr p)
    : f_(std::move(f)), p_(std::move(p)) {
  if (f_->variables() != p_->variables()) {
    throw DimensionMismatch("DifferenceFunction: operands differ in variable count");
  }
}

FunctionPtr subtract_perturbation(const FunctionPtr& f, const SparsePolynomial& p) {
  if (f->variables() != p.variables()) {
    throw DimensionMismatch("subtract_perturbation: operands differ in variable count");
  }
  if (const auto* poly = dynamic_cast<const SparsePolynomial*>(f.get())) {
    return std::make_shared<SparsePolynomial>(*poly - p);
  }
  return std::make_shared<DifferenceFunction>(f, std::make_shared<SparsePolynomial>(p));
}

FunctionPtr subtract_perturbation(const FunctionPtr& f, const FunctionPtr& p) {
  if (const auto* poly = dynamic_cast<const SparsePolynomial*>(p.get())) {
    return subtract_perturbation(f, *poly);
  }
  if (const auto* expansion = dynamic_cast<const BasisExpansion*>(p.get())) {
    if (auto poly = expansion->as_polynomial()) return subtract_perturbation(f, *poly);
  }
  return std::make_shared<DifferenceFunction>(f, p);
}

// --- SystemInstance ---------------------------------------------------------

SystemInstance::SystemInstance(std::vector<FunctionPtr> functions, std::vector<BasisSet> bases,
                               std::size_t k)
    : functions_(std::move(functions)), bases_(std::move(bases)), k_(k), variables_(0) {
  if (functions_.empty()) throw InvalidArgument("SystemInstance: no functions");
  if (bases_.size() != functions_.size()) {
    throw DimensionMismatch("SystemInstance: need one basis per function");
  }
  if (k_ == 0) throw InvalidArgument("SystemInstance: k must be at least 1");
  variables_ = functions_.front()->variables();
  if (variables_ == 0) throw InvalidArgument("SystemInstance: functions need at least one variable");
  if (functions_.size() <= variables_) {
    throw InvalidArgument("SystemInstance: system is not over-constrained (N = " +
                          std::to_string(functions_.size()) + ", n = " +
                          std::to_string(variables_) + ")");
  }
  for (std::size_t i = 0; i < functions_.size(); ++i) {
    if (!functions_[i] || functions_[i]->variables() != variables_) {
      throw DimensionMismatch("SystemInstance: function " + std::to_string(i) +
                              " has the wrong variable count");
    }
    if (bases_[i].size() < k_) {
      throw InvalidArgument("SystemInstance: basis " + std::to_string(i) + " has " +
                            std::to_string(bases_[i].size()) + " elements, fewer than k = " +
                            std::to_string(k_));
    }
    for (const auto& b : bases_[i].elements) {
      if (!b || b->variables() != variables_) {
        throw DimensionMismatch("SystemInstance: basis " + std::to_string(i) +
                                " has an element with the wrong variable count");
      }
    }
  }
}

double SystemInstance::scale() const {
  double best = 0.0;
  for (const auto& f : functions_) {
    if (const auto* poly = dynamic_cast<const SparsePolynomial*>(f.get())) {
      best = std::max(best, poly->max_abs_coefficient());
    }
  }
  return 1.0 + best;
}

bool SystemInstance::all_exact_hessians() const {
  for (std::size_t i = 0; i < functions_.size(); ++i) {
    if (!functions_[i]->has_exact_hessian() || !bases_[i].all_exact_hessians()) return false;
  }
  return true;
}

}  // namespace ncs
