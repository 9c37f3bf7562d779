#include "ncs/weierstrass.hpp"

#include <string>

#include "ncs/errors.hpp"

namespace ncs {

namespace {

BlockData build_block(const AnalyticFunction& f, const BasisSet& basis, const RootTuple& z,
                      std::size_t t, ModelDepth depth, EvaluationCounters* counters) {
  const auto k = static_cast<Index>(z.size());
  const auto n = static_cast<Index>(z.variables());
  const auto m = static_cast<Index>(basis.size());

  BlockData b;
  b.vandermonde = build_vandermonde(basis, z, counters).matrix;
  auto pinv = linalg::pseudoinverse(b.vandermonde);
  if (pinv.rank < k) {
    throw RankDeficient("basis " + std::to_string(t) + ": Vandermonde matrix has rank " +
                            std::to_string(pinv.rank) + " < k = " + std::to_string(k),
                        t);
  }
  b.pinv = std::move(pinv.matrix);
  b.values.resize(k);
  for (Index i = 0; i < k; ++i) b.values(i) = f.value(z.node(static_cast<std::size_t>(i)));
  b.coefficients = b.pinv * b.values;
  // (V^dagger)^* V^dagger = (V V^*)^{-1} for full row rank V.
  b.weights = b.pinv.adjoint() * b.coefficients;
  if (counters) {
    counters->input_evaluations += static_cast<std::uint64_t>(k);
    counters->arithmetic_ops += static_cast<std::uint64_t>(k * k * m + 2 * m * k);
  }
  if (depth == ModelDepth::Values) return b;

  b.input_gradients.resize(k, n);
  b.node_derivatives.resize(k, n);
  b.basis_gradients.assign(static_cast<std::size_t>(k), ComplexMatrix(n, m));
  for (Index i = 0; i < k; ++i) {
    const auto& node = z.node(static_cast<std::size_t>(i));
    b.input_gradients.row(i) = f.gradient(node).transpose();
    auto& u = b.basis_gradients[static_cast<std::size_t>(i)];
    for (Index e = 0; e < m; ++e) u.col(e) = basis.elements[static_cast<std::size_t>(e)]->gradient(node);
    b.node_derivatives.row(i) = b.input_gradients.row(i) - (u * b.coefficients).transpose();
  }
  if (counters) {
    counters->input_evaluations += static_cast<std::uint64_t>(k * n);
    counters->basis_evaluations += static_cast<std::uint64_t>(k * n * m);
    counters->arithmetic_ops += static_cast<std::uint64_t>(k * n * m);
  }
  if (depth == ModelDepth::FirstOrder) return b;

  b.input_hessians.resize(static_cast<std::size_t>(k));
  b.basis_hessians.resize(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    const auto& node = z.node(static_cast<std::size_t>(i));
    b.input_hessians[static_cast<std::size_t>(i)] = f.hessian(node);
    auto& row = b.basis_hessians[static_cast<std::size_t>(i)];
    row.reserve(static_cast<std::size_t>(m));
    for (Index e = 0; e < m; ++e) row.push_back(basis.elements[static_cast<std::size_t>(e)]->hessian(node));
  }
  if (counters) {
    counters->input_evaluations += static_cast<std::uint64_t>(k * n * n);
    counters->basis_evaluations += static_cast<std::uint64_t>(k * n * n * m);
  }
  return b;
}

void require_nodes(const SystemInstance& sys, const RootTuple& z) {
  if (z.size() != sys.roots()) {
    throw DimensionMismatch("expected " + std::to_string(sys.roots()) + " nodes, got " +
                            std::to_string(z.size()));
  }
  if (z.variables() != sys.variables()) {
    throw DimensionMismatch("nodes have " + std::to_string(z.variables()) +
                            " coordinates, system has " + std::to_string(sys.variables()) +
                            " variables");
  }
  if (!z.all_finite()) throw NonFiniteValue("nodes contain NaN or infinity");
}

}  // namespace

double LocalModel::objective() const {
  double sum = 0.0;
  for (const auto& b : blocks) sum += b.coefficients.squaredNorm();
  return sum;
}

ComplexVector LocalModel::holomorphic_gradient() const {
  const auto n = static_cast<Index>(variables);
  const auto k = static_cast<Index>(roots);
  ComplexVector g = ComplexVector::Zero(n * k);
  for (const auto& b : blocks) {
    for (Index i = 0; i < k; ++i) {
      for (Index j = 0; j < n; ++j) g(i * n + j) += std::conj(b.weights(i)) * b.node_derivatives(i, j);
    }
  }
  return g;
}

LocalModel build_local_model(const SystemInstance& sys, const RootTuple& z, ModelDepth depth,
                             EvaluationCounters* counters) {
  require_nodes(sys, z);
  LocalModel model;
  model.variables = sys.variables();
  model.roots = sys.roots();
  model.blocks.reserve(sys.equations());
  for (std::size_t t = 0; t < sys.equations(); ++t) {
    model.blocks.push_back(build_block(sys.function(t), sys.basis(t), z, t, depth, counters));
  }
  return model;
}

ComplexVector WeierstrassValue::stacked() const {
  Index total = 0;
  for (const auto& b : blocks) total += b.size();
  ComplexVector out(total);
  Index offset = 0;
  for (const auto& b : blocks) {
    out.segment(offset, b.size()) = b;
    offset += b.size();
  }
  return out;
}

double WeierstrassValue::norm_sq() const {
  double sum = 0.0;
  for (const auto& b : blocks) sum += b.squaredNorm();
  return sum;
}

WeierstrassValue weierstrass_map(const SystemInstance& sys, const RootTuple& z) {
  const auto model = build_local_model(sys, z, ModelDepth::Values);
  WeierstrassValue w;
  for (const auto& b : model.blocks) w.blocks.push_back(b.coefficients);
  return w;
}

ObjectiveEvaluation objective(const SystemInstance& sys, const RootTuple& z,
                              EvaluationCounters* counters) {
  require_nodes(sys, z);
  const auto k = static_cast<Index>(z.size());
  ObjectiveEvaluation out;
  out.residuals.resize(static_cast<Index>(sys.equations()) * k);
  for (std::size_t t = 0; t < sys.equations(); ++t) {
    const auto v = build_vandermonde(sys.basis(t), z, counters);
    ComplexVector values(k);
    for (Index i = 0; i < k; ++i) values(i) = sys.function(t).value(z.node(static_cast<std::size_t>(i)));
    out.residuals.segment(static_cast<Index>(t) * k, k) = values;
    double norm = 0.0;
    try {
      norm = interpolant_norm_sq(values, gram_matrix(v));
    } catch (const SingularMatrix&) {
      throw RankDeficient("basis " + std::to_string(t) + ": Gram matrix is singular at these nodes", t);
    }
    out.per_function.push_back(norm);
    out.value += norm;
    if (counters) {
      const auto m = static_cast<std::uint64_t>(v.matrix.cols());
      const auto kk = static_cast<std::uint64_t>(k);
      counters->input_evaluations += kk;
      counters->arithmetic_ops += kk * kk * m + ops::cube(kk);
    }
  }
  return out;
}

WeierstrassJacobian jacobian(const LocalModel& model) {
  const auto n = static_cast<Index>(model.variables);
  const auto k = static_cast<Index>(model.roots);
  Index rows = 0;
  for (const auto& b : model.blocks) rows += b.pinv.rows();
  WeierstrassJacobian jac{ComplexMatrix::Zero(rows, n * k)};
  Index offset = 0;
  for (const auto& b : model.blocks) {
    const Index m = b.pinv.rows();
    // Only row i of the derivative of (F - (grad V) W) is nonzero for column (i, j).
    for (Index i = 0; i < k; ++i) {
      for (Index j = 0; j < n; ++j) {
        jac.matrix.block(offset, i * n + j, m, 1) = b.pinv.col(i) * b.node_derivatives(i, j);
      }
    }
    offset += m;
  }
  return jac;
}

WeierstrassJacobian jacobian(const SystemInstance& sys, const RootTuple& z) {
  return jacobian(build_local_model(sys, z, ModelDepth::FirstOrder));
}

ComplexVector gradient_of_objective(const SystemInstance& sys, const RootTuple& z) {
  return build_local_model(sys, z, ModelDepth::FirstOrder).holomorphic_gradient();
}

RealVector real_gradient(const ComplexVector& holomorphic) {
  const Index d = holomorphic.size();
  RealVector out(2 * d);
  out.head(d) = 2.0 * holomorphic.real();
  out.tail(d) = -2.0 * holomorphic.imag();
  return out;
}

RealVector to_real(const ComplexVector& z) {
  RealVector out(2 * z.size());
  out.head(z.size()) = z.real();
  out.tail(z.size()) = z.imag();
  return out;
}

ComplexVector from_real(const RealVector& x) {
  const Index d = x.size() / 2;
  ComplexVector out(d);
  for (Index i = 0; i < d; ++i) out(i) = Complex(x(i), x(d + i));
  return out;
}

std::vector<BasisExpansion> perturbations(const SystemInstance& sys, const RootTuple& z) {
  const auto model = build_local_model(sys, z, ModelDepth::Values);
  std::vector<BasisExpansion> out;
  out.reserve(model.blocks.size());
  for (std::size_t t = 0; t < model.blocks.size(); ++t) {
    out.emplace_back(sys.basis(t), model.blocks[t].coefficients);
  }
  return out;
}

std::vector<FunctionPtr> perturbed_system(const SystemInstance& sys, const RootTuple& z) {
  const auto ps = perturbations(sys, z);
  std::vector<FunctionPtr> out;
  out.reserve(ps.size());
  for (std::size_t t = 0; t < ps.size(); ++t) {
    out.push_back(subtract_perturbation(sys.functions()[t], std::make_shared<BasisExpansion>(ps[t])));
  }
  return out;
}

}  // namespace ncs
