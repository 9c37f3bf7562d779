#pragma once

// Iteration schemes for minimizing ||W(z)||^2 and the shared run controller.

#include <array>
#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncs/counters.hpp"
#include "ncs/functions.hpp"
#include "ncs/interpolation.hpp"
#include "ncs/weierstrass.hpp"

namespace ncs {

enum class Method { SimplifiedGaussNewton, StandardGaussNewton, Quadratic, ConjugateGradient };

inline constexpr std::array<Method, 4> kAllMethods = {
    Method::SimplifiedGaussNewton, Method::StandardGaussNewton, Method::Quadratic,
    Method::ConjugateGradient};

/// Command-line spelling, e.g. "simplified-gn".
std::string_view method_name(Method m);
/// Short table label, e.g. "Simp G-N".
std::string_view method_label(Method m);
std::optional<Method> parse_method(std::string_view name);

/// Only the Gauss-Newton variants are subject to the divergence test.
bool uses_divergence_test(Method m);

enum class Status { Converged, Diverged, MaxIterations, Failed };

std::string_view status_name(Status s);

struct SolverConfig {
  std::size_t max_iterations = 128;
  double step_tolerance = 1e-3;
  std::size_t consecutive = 2;
  std::size_t divergence_window = 3;
  unsigned beta = 40;
  double eigen_floor = 1e-8;
  double shrink = 0.5;
  std::size_t max_halvings = 40;

  /// Throws InvalidArgument naming the first bad field.
  void validate() const;
};

struct StepOutcome {
  RootTuple next;
  double objective_before = 0.0;
  // The quadratic line search found no decrease for a step above tolerance.
  bool stalled = false;
};

/// Hessian-free conjugacy memory for the CG method.
struct CgMemory {
  RealVector direction;
  RealVector gradient;
  std::size_t since_restart = 0;
};

struct SolverState {
  RootTuple z;
  std::size_t iteration = 0;
  EvaluationCounters counters;
  std::optional<CgMemory> cg;
};

/// Node-wise z_i - J(z_i)^dagger f(z_i). Needs |B_t| = k for every t.
/// Throws AssumptionViolated or RankDeficientNodeJacobian.
StepOutcome step_simplified_gn(const SystemInstance& sys, const RootTuple& z,
                               EvaluationCounters* counters = nullptr);

/// Solves the nk x nk normal equations assembled from the Gram-weighted
/// derivative blocks. Throws SingularNormalMatrix.
StepOutcome step_standard_gn(const SystemInstance& sys, const RootTuple& z,
                             EvaluationCounters* counters = nullptr);

StepOutcome step_quadratic(const SystemInstance& sys, const RootTuple& z, const SolverConfig& cfg,
                           EvaluationCounters* counters = nullptr);

/// Polak-Ribiere direction and a golden-section line minimization. Updates
/// state.cg and state.counters but not state.z.
StepOutcome step_conjugate_gradient(const SystemInstance& sys, SolverState& state,
                                    const SolverConfig& cfg);

/// Real Hessian of ||W||^2 in the [Re z; Im z] layout, from a model built
/// with ModelDepth::SecondOrder.
RealMatrix objective_hessian(const LocalModel& model);

/// Analytic when every input and basis element has exact second derivatives,
/// otherwise central differences of the real gradient.
RealMatrix objective_hessian(const SystemInstance& sys, const RootTuple& z,
                             EvaluationCounters* counters = nullptr);

/// Newton direction for a Hessian whose eigenvalues are replaced by
/// max(|lambda|, floor * max|lambda|). Steepest descent if H vanishes.
RealVector modified_newton_direction(const RealMatrix& hessian, const RealVector& gradient,
                                     double floor);

/// Step-norm bookkeeping for the stopping rules.
class ConvergenceMonitor {
 public:
  enum class Verdict { Continue, Converged, Diverged };

  ConvergenceMonitor(const SolverConfig& cfg, bool divergence_test);

  Verdict record(double step_norm);
  std::size_t steps() const { return steps_; }

 private:
  double tolerance_;
  std::size_t consecutive_;
  std::size_t window_;
  bool divergence_test_;
  std::size_t steps_ = 0;
  std::deque<double> recent_;
};

struct TraceEntry {
  double objective = 0.0;  // at the iterate the step started from
  double step_norm = 0.0;
};

struct SolverResult {
  Method method = Method::SimplifiedGaussNewton;
  Status status = Status::MaxIterations;
  bool stalled = false;
  std::string diagnostic;
  RootTuple z;
  double objective = 0.0;
  std::vector<BasisExpansion> perturbations;
  std::vector<FunctionPtr> perturbed;
  std::vector<TraceEntry> trace;
  EvaluationCounters counters;

  std::size_t iterations() const { return trace.size(); }
};

SolverResult run(Method method, const SystemInstance& sys, const RootTuple& z0,
                 const SolverConfig& cfg = {});

}  // namespace ncs
