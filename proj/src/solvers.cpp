#include "ncs/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ncs/errors.hpp"

namespace ncs {

// --- names ------------------------------------------------------------------

std::string_view method_name(Method m) {
  switch (m) {
    case Method::SimplifiedGaussNewton: return "simplified-gn";
    case Method::StandardGaussNewton: return "standard-gn";
    case Method::Quadratic: return "quadratic";
    case Method::ConjugateGradient: return "conjugate-gradient";
  }
  return "?";
}

std::string_view method_label(Method m) {
  switch (m) {
    case Method::SimplifiedGaussNewton: return "Simp G-N";
    case Method::StandardGaussNewton: return "Std G-N";
    case Method::Quadratic: return "Quad It";
    case Method::ConjugateGradient: return "Conj Grd";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

bool uses_divergence_test(Method m) {
  return m == Method::SimplifiedGaussNewton || m == Method::StandardGaussNewton;
}

std::string_view status_name(Status s) {
  switch (s) {
    case Status::Converged: return "converged";
    case Status::Diverged: return "diverged";
    case Status::MaxIterations: return "max-iterations";
    case Status::Failed: return "failed";
  }
  return "?";
}

void SolverConfig::validate() const {
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
  if (!(step_tolerance > 0.0)) throw InvalidArgument("step_tolerance must be positive");
  if (consecutive < 1) throw InvalidArgument("consecutive must be at least 1");
  if (divergence_window < 1) throw InvalidArgument("divergence_window must be at least 1");
  if (beta < 1) throw InvalidArgument("beta must be at least 1");
  if (!(eigen_floor > 0.0)) throw InvalidArgument("eigen_floor must be positive");
  if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidArgument("shrink must lie in (0, 1)");
  if (max_halvings < 1) throw InvalidArgument("max_halvings must be at least 1");
}

namespace {

using u64 = std::uint64_t;

RootTuple displaced(const RootTuple& z, const ComplexVector& delta) {
  return RootTuple::from_flat(z.flat() + delta, z.variables());
}

// Objective at a trial point; any failure counts as +inf so line searches
// simply reject the point.
double trial_objective(const SystemInstance& sys, const RootTuple& z, EvaluationCounters* counters) {
  if (!z.all_finite()) return std::numeric_limits<double>::infinity();
  try {
    const double v = objective(sys, z, counters).value;
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

// --- simplified Gauss-Newton --------------------------------------------------

StepOutcome step_simplified_gn(const SystemInstance& sys, const RootTuple& z,
                               EvaluationCounters* counters) {
  for (std::size_t t = 0; t < sys.equations(); ++t) {
    if (sys.basis(t).size() != sys.roots()) {
      throw AssumptionViolated("simplified Gauss-Newton needs |B_t| = k; basis " + std::to_string(t) +
                               " has " + std::to_string(sys.basis(t).size()) + " elements, k = " +
                               std::to_string(sys.roots()));
    }
  }
  const auto model = build_local_model(sys, z, ModelDepth::FirstOrder, counters);
  const auto big_n = static_cast<Index>(sys.equations());
  const auto n = static_cast<Index>(sys.variables());

  std::vector<ComplexVector> nodes;
  nodes.reserve(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    ComplexMatrix jac(big_n, n);
    ComplexVector f(big_n);
    for (Index t = 0; t < big_n; ++t) {
      const auto& b = model.blocks[static_cast<std::size_t>(t)];
      jac.row(t) = b.node_derivatives.row(static_cast<Index>(i));
      f(t) = b.values(static_cast<Index>(i));
    }
    const auto pinv = linalg::pseudoinverse(jac);
    if (pinv.rank < n) {
      throw RankDeficientNodeJacobian("Jacobian of the perturbed system at node " + std::to_string(i) +
                                          " has rank " + std::to_string(pinv.rank) + " < n = " +
                                          std::to_string(n),
                                      i);
    }
    nodes.push_back(z.node(i) - pinv.matrix * f);
  }
  if (counters) {
    counters->arithmetic_ops += static_cast<u64>(z.size()) * static_cast<u64>(big_n * n * n);
  }
  return {RootTuple(std::move(nodes)), model.objective(), false};
}

// --- standard Gauss-Newton ------------------------------------------------------

StepOutcome step_standard_gn(const SystemInstance& sys, const RootTuple& z,
                             EvaluationCounters* counters) {
  const auto model = build_local_model(sys, z, ModelDepth::FirstOrder, counters);
  const auto n = static_cast<Index>(sys.variables());
  const auto k = static_cast<Index>(sys.roots());
  const Index d = n * k;

  ComplexMatrix normal = ComplexMatrix::Zero(d, d);
  ComplexVector rhs = ComplexVector::Zero(d);
  for (const auto& b : model.blocks) {
    // D_t is k x nk with d_t[i, j] at (i, i n + j).
    ComplexMatrix big_d = ComplexMatrix::Zero(k, d + 1);
    for (Index i = 0; i < k; ++i) big_d.block(i, i * n, 1, n) = b.node_derivatives.row(i);
    big_d.col(d) = b.values;
    const ComplexMatrix gram = b.vandermonde * b.vandermonde.adjoint();
    ComplexMatrix solved;
    try {
      solved = linalg::solve_hermitian(gram, big_d);
    } catch (const SingularMatrix& e) {
      throw RankDeficient(std::string("Gram matrix is singular: ") + e.what());
    }
    const ComplexMatrix d_adj = big_d.leftCols(d).adjoint();
    normal += d_adj * solved.leftCols(d);
    rhs += d_adj * solved.col(d);
  }
  ComplexVector delta;
  try {
    delta = linalg::solve_hermitian(normal, rhs);
  } catch (const SingularMatrix& e) {
    throw SingularNormalMatrix(std::string("Gauss-Newton normal matrix is singular: ") + e.what());
  }
  if (counters) {
    const auto kk = static_cast<u64>(k);
    const auto dd = static_cast<u64>(d);
    const auto big_n = static_cast<u64>(sys.equations());
    counters->arithmetic_ops += big_n * (ops::cube(kk) + kk * kk * dd + dd * dd * kk) + ops::cube(dd);
  }
  return {displaced(z, -delta), model.objective(), false};
}

// --- Hessian ----------------------------------------------------------------

RealMatrix objective_hessian(const LocalModel& model) {
  const auto n = static_cast<Index>(model.variables);
  const auto k = static_cast<Index>(model.roots);
  const Index d = n * k;
  ComplexMatrix a = ComplexMatrix::Zero(d, d);  // d^2 phi / dz_a dz_b
  ComplexMatrix b = ComplexMatrix::Zero(d, d);  // d^2 phi / dz_a dconj(z_b)

  for (const auto& blk : model.blocks) {
    if (blk.input_hessians.empty()) {
      throw InvalidArgument("objective_hessian: model lacks second derivatives");
    }
    const Index m = blk.pinv.rows();
    const ComplexMatrix minv = blk.pinv.adjoint() * blk.pinv;
    const ComplexMatrix pperp = ComplexMatrix::Identity(m, m) - blk.pinv * blk.vandermonde;

    ComplexMatrix u_stack(d, m);
    std::vector<ComplexMatrix> lgrad(static_cast<std::size_t>(k));  // (j, i') = dL_i'/dx_j at z_i
    std::vector<ComplexMatrix> hdiff(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) {
      const auto si = static_cast<std::size_t>(i);
      u_stack.middleRows(i * n, n) = blk.basis_gradients[si];
      lgrad[si] = blk.basis_gradients[si] * blk.pinv;
      hdiff[si] = blk.input_hessians[si];
      for (Index e = 0; e < m; ++e) hdiff[si] -= blk.coefficients(e) * blk.basis_hessians[si][static_cast<std::size_t>(e)];
    }
    const ComplexMatrix q = u_stack * pperp * u_stack.adjoint();
    const auto& g = blk.weights;
    const auto& dv = blk.node_derivatives;

    for (Index i = 0; i < k; ++i) {
      for (Index j = 0; j < n; ++j) {
        const Index r = i * n + j;
        for (Index i2 = 0; i2 < k; ++i2) {
          for (Index j2 = 0; j2 < n; ++j2) {
            const Index c = i2 * n + j2;
            Complex av = -std::conj(g(i2)) * dv(i, j) * lgrad[static_cast<std::size_t>(i2)](j2, i) -
                         std::conj(g(i)) * dv(i2, j2) * lgrad[static_cast<std::size_t>(i)](j, i2);
            if (i == i2) av += std::conj(g(i)) * hdiff[static_cast<std::size_t>(i)](j, j2);
            a(r, c) += av;
            b(r, c) += std::conj(dv(i2, j2)) * minv(i2, i) * dv(i, j) - std::conj(g(i)) * g(i2) * q(r, c);
          }
        }
      }
    }
  }

  RealMatrix h(2 * d, 2 * d);
  h.topLeftCorner(d, d) = 2.0 * (a.real() + b.real());
  h.topRightCorner(d, d) = -2.0 * a.imag() + 2.0 * b.imag();
  h.bottomLeftCorner(d, d) = -2.0 * a.imag() - 2.0 * b.imag();
  h.bottomRightCorner(d, d) = -2.0 * a.real() + 2.0 * b.real();
  return 0.5 * (h + h.transpose());
}

RealMatrix objective_hessian(const SystemInstance& sys, const RootTuple& z,
                             EvaluationCounters* counters) {
  if (sys.all_exact_hessians()) {
    const auto model = build_local_model(sys, z, ModelDepth::SecondOrder, counters);
    if (counters) {
      const auto d = static_cast<u64>(sys.variables() * sys.roots());
      counters->arithmetic_ops += static_cast<u64>(sys.equations()) * d * d * static_cast<u64>(sys.roots());
    }
    return objective_hessian(model);
  }
  const RealVector x = to_real(z.flat());
  const Index dim = x.size();
  RealMatrix h(dim, dim);
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  for (Index c = 0; c < dim; ++c) {
    const double step = base * std::max(1.0, std::abs(x(c)));
    RealVector xp = x, xm = x;
    xp(c) += step;
    xm(c) -= step;
    const auto zp = RootTuple::from_flat(from_real(xp), z.variables());
    const auto zm = RootTuple::from_flat(from_real(xm), z.variables());
    const RealVector gp =
        real_gradient(build_local_model(sys, zp, ModelDepth::FirstOrder, counters).holomorphic_gradient());
    const RealVector gm =
        real_gradient(build_local_model(sys, zm, ModelDepth::FirstOrder, counters).holomorphic_gradient());
    h.col(c) = (gp - gm) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

RealVector modified_newton_direction(const RealMatrix& hessian, const RealVector& gradient,
                                     double floor) {
  const auto eig = linalg::eig_symmetric(hessian);
  const double biggest = eig.eigenvalues.cwiseAbs().maxCoeff();
  if (!(biggest > 0.0)) return -gradient;
  const RealVector lambda = eig.eigenvalues.cwiseAbs().cwiseMax(floor * biggest);
  const RealVector projected = eig.eigenvectors.transpose() * gradient;
  return -(eig.eigenvectors * projected.cwiseQuotient(lambda));
}

// --- quadratic iteration -----------------------------------------------------

StepOutcome step_quadratic(const SystemInstance& sys, const RootTuple& z, const SolverConfig& cfg,
                           EvaluationCounters* counters) {
  const bool exact = sys.all_exact_hessians();
  const auto model =
      build_local_model(sys, z, exact ? ModelDepth::SecondOrder : ModelDepth::FirstOrder, counters);
  const double phi0 = model.objective();
  const RealVector g = real_gradient(model.holomorphic_gradient());
  if (g.squaredNorm() == 0.0) return {z, phi0, false};

  RealMatrix h;
  if (exact) {
    h = objective_hessian(model);
    if (counters) {
      const auto d = static_cast<u64>(sys.variables() * sys.roots());
      counters->arithmetic_ops += static_cast<u64>(sys.equations()) * d * d * static_cast<u64>(sys.roots());
    }
  } else {
    h = objective_hessian(sys, z, counters);
  }
  if (counters) counters->arithmetic_ops += ops::cube(static_cast<u64>(h.rows()));

  const RealVector step = modified_newton_direction(h, g, cfg.eigen_floor);
  const ComplexVector delta = from_real(step);
  double alpha = 1.0;
  for (std::size_t halving = 0; halving <= cfg.max_halvings; ++halving) {
    RootTuple trial = displaced(z, alpha * delta);
    if (trial_objective(sys, trial, counters) < phi0) return {std::move(trial), phi0, false};
    alpha *= cfg.shrink;
  }
  // No decrease anywhere on the segment. A step already below tolerance means
  // z is numerically stationary; anything larger is a genuine stall.
  return {z, phi0, step.norm() >= cfg.step_tolerance};
}

// --- conjugate gradient --------------------------------------------------------

namespace {

struct LineSearch {
  const SystemInstance& sys;
  const RootTuple& z;
  ComplexVector unit;
  EvaluationCounters* counters;
  double best_alpha = 0.0;
  double best_value;

  double operator()(double alpha) {
    const double v = trial_objective(sys, displaced(z, alpha * unit), counters);
    if (v < best_value) {
      best_value = v;
      best_alpha = alpha;
    }
    return v;
  }
};

constexpr int kMaxBracketSteps = 60;

// Minimizes along the line to beta bits of the bracket width and returns the
// best abscissa seen. Zero when no decrease was found.
double line_minimize(LineSearch& ls, double phi0, unsigned beta) {
  double lo = 0.0, hi = 0.0;
  const double f1 = ls(1.0);
  if (f1 < phi0) {
    double a = 0.0, b = 1.0, fb = f1;
    bool closed = false;
    for (int s = 0; s < kMaxBracketSteps; ++s) {
      const double c = 2.0 * b;
      const double fc = ls(c);
      if (fc >= fb) {
        lo = a;
        hi = c;
        closed = true;
        break;
      }
      a = b;
      b = c;
      fb = fc;
    }
    if (!closed) return ls.best_alpha;
  } else {
    double b = 1.0;
    bool found = false;
    for (int s = 0; s < kMaxBracketSteps; ++s) {
      b *= 0.5;
      if (ls(b) < phi0) {
        found = true;
        break;
      }
    }
    if (!found) return 0.0;
    lo = 0.0;
    hi = 2.0 * b;
  }

  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  const double target = (hi - lo) * std::ldexp(1.0, -static_cast<int>(beta));
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1v = ls(x1);
  double f2v = ls(x2);
  while (hi - lo > target) {
    if (f1v <= f2v) {
      hi = x2;
      x2 = x1;
      f2v = f1v;
      x1 = hi - ratio * (hi - lo);
      f1v = ls(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1v = f2v;
      x2 = lo + ratio * (hi - lo);
      f2v = ls(x2);
    }
  }
  return ls.best_alpha;
}

}  // namespace

StepOutcome step_conjugate_gradient(const SystemInstance& sys, SolverState& state,
                                    const SolverConfig& cfg) {
  EvaluationCounters* counters = &state.counters;
  const auto model = build_local_model(sys, state.z, ModelDepth::FirstOrder, counters);
  const double phi0 = model.objective();
  const RealVector g = real_gradient(model.holomorphic_gradient());
  if (g.squaredNorm() == 0.0) return {state.z, phi0, false};

  const std::size_t period = 2 * sys.variables() * sys.roots();
  RealVector dir = -g;
  if (state.cg && state.cg->since_restart < period) {
    const RealVector& gp = state.cg->gradient;
    const double pr = std::max(0.0, g.dot(g - gp) / gp.squaredNorm());
    dir = -g + pr * state.cg->direction;
    if (pr == 0.0 || dir.dot(g) >= 0.0) {
      dir = -g;
      state.cg->since_restart = 0;
    }
  } else {
    state.cg = CgMemory{};
  }
  state.cg->direction = dir;
  state.cg->gradient = g;
  ++state.cg->since_restart;

  LineSearch ls{sys, state.z, from_real(dir / dir.norm()), counters, 0.0, phi0};
  const double alpha = line_minimize(ls, phi0, cfg.beta);
  if (alpha == 0.0) return {state.z, phi0, false};
  return {displaced(state.z, alpha * ls.unit), phi0, false};
}

// --- run controller ----------------------------------------------------------

ConvergenceMonitor::ConvergenceMonitor(const SolverConfig& cfg, bool divergence_test)
    : tolerance_(cfg.step_tolerance),
      consecutive_(cfg.consecutive),
      window_(cfg.divergence_window),
      divergence_test_(divergence_test) {}

ConvergenceMonitor::Verdict ConvergenceMonitor::record(double step_norm) {
  ++steps_;
  recent_.push_back(step_norm);
  while (recent_.size() > std::max(consecutive_, window_)) recent_.pop_front();

  if (recent_.size() >= consecutive_ &&
      std::all_of(recent_.end() - static_cast<std::ptrdiff_t>(consecutive_), recent_.end(),
                  [this](double s) { return s < tolerance_; })) {
    return Verdict::Converged;
  }
  if (divergence_test_ && recent_.size() >= window_ && window_ >= 2) {
    auto first = recent_.end() - static_cast<std::ptrdiff_t>(window_);
    bool increasing = true;
    for (auto it = first + 1; it != recent_.end(); ++it) {
      if (!(*it > *(it - 1))) {
        increasing = false;
        break;
      }
    }
    if (increasing) return Verdict::Diverged;
  }
  return Verdict::Continue;
}

SolverResult run(Method method, const SystemInstance& sys, const RootTuple& z0,
                 const SolverConfig& cfg) {
  cfg.validate();
  SolverResult result;
  result.method = method;
  SolverState state{z0, 0, {}, std::nullopt};
  ConvergenceMonitor monitor(cfg, uses_divergence_test(method));

  bool decided = false;
  while (state.iteration < cfg.max_iterations) {
    StepOutcome out;
    try {
      switch (method) {
        case Method::SimplifiedGaussNewton: out = step_simplified_gn(sys, state.z, &state.counters); break;
        case Method::StandardGaussNewton: out = step_standard_gn(sys, state.z, &state.counters); break;
        case Method::Quadratic: out = step_quadratic(sys, state.z, cfg, &state.counters); break;
        case Method::ConjugateGradient: out = step_conjugate_gradient(sys, state, cfg); break;
      }
    } catch (const Error& e) {
      result.status = Status::Failed;
      result.diagnostic = e.what();
      decided = true;
      break;
    }
    ++state.iteration;
    if (!out.next.all_finite()) {
      result.trace.push_back({out.objective_before, std::numeric_limits<double>::infinity()});
      result.status = Status::Failed;
      result.diagnostic = "iterate became non-finite";
      decided = true;
      break;
    }
    const double step = (out.next.flat() - state.z.flat()).norm();
    result.trace.push_back({out.objective_before, step});
    state.z = std::move(out.next);
    if (out.stalled) {
      result.status = Status::MaxIterations;
      result.stalled = true;
      result.diagnostic = "line search found no decrease";
      decided = true;
      break;
    }
    const auto verdict = monitor.record(step);
    if (verdict == ConvergenceMonitor::Verdict::Converged) {
      result.status = Status::Converged;
      decided = true;
      break;
    }
    if (verdict == ConvergenceMonitor::Verdict::Diverged) {
      result.status = Status::Diverged;
      decided = true;
      break;
    }
  }
  if (!decided) result.status = Status::MaxIterations;

  result.z = state.z;
  result.counters = state.counters;
  try {
    result.objective = objective(sys, state.z).value;
    result.perturbations = perturbations(sys, state.z);
    result.perturbed = perturbed_system(sys, state.z);
  } catch (const Error& e) {
    result.objective = std::numeric_limits<double>::quiet_NaN();
    if (result.status != Status::Failed) {
      result.status = Status::Failed;
      result.diagnostic = e.what();
    }
  }
  return result;
}

}  // namespace ncs
