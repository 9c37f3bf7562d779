#pragma once

// Random problem generation, the four-method comparison and the counter
// scaling checks.

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "ncs/counters.hpp"
#include "ncs/functions.hpp"
#include "ncs/interpolation.hpp"
#include "ncs/solvers.hpp"

namespace ncs {

struct ProblemConfig {
  std::size_t equations = 5;  // N
  std::size_t variables = 1;  // n
  unsigned degree = 3;        // D
  std::size_t roots = 1;      // k
  int exponent = 0;           // perturbation coefficients lie in (-10^x, 10^x)
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  bool complex_roots = false;

  void validate() const;
};

/// SplitMix64 applied to a (key, counter) pair. Each substream is keyed by
/// everything that identifies the draw, so draws never shift when unrelated
/// code changes.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t x);
  static std::uint64_t key(std::initializer_list<std::uint64_t> parts);

  std::uint64_t next();
  /// [0, 1) with 53 random bits.
  double uniform();
  /// Open interval (lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal by Box-Muller.
  double normal();
  /// Uniform in the unit ball of R^dim.
  RealVector unit_ball(Index dim);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct GeneratedProblem {
  std::vector<SparsePolynomial> unperturbed;
  std::vector<SparsePolynomial> inputs;
  RootTuple true_roots;
  SystemInstance system;
  RootTuple initial_guess;
  double perturbation_norm = 0.0;
  std::size_t attempts = 1;
};

/// Deterministic in (cfg, trial). Retries degenerate draws on fresh
/// substreams; throws GenerationDegenerate when they run out.
GeneratedProblem generate_problem(const ProblemConfig& cfg, std::size_t trial);

struct ProblemOutcome {
  bool converged = false;
  double residual = 0.0;
  double output_norm = 0.0;
  std::size_t iterations = 0;
};

struct ComparisonRow {
  Method method = Method::SimplifiedGaussNewton;
  double converged_percent = 0.0;
  double rel_residual_min = 0.0, rel_residual_avg = 0.0, rel_residual_max = 0.0;
  double abs_residual_min = 0.0, abs_residual_max = 0.0;
  double rel_output_min = 0.0, rel_output_avg = 0.0, rel_output_max = 0.0;
  double abs_output_min = 0.0, abs_output_avg = 0.0, abs_output_max = 0.0;
  double iterations_avg = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::size_t common_converged = 0;
  std::size_t total_problems = 0;
  // outcomes[p][method index], problems ordered by (exponent, trial).
  std::vector<std::array<ProblemOutcome, 4>> outcomes;
};

/// ||(f_t(z_j))_{t, j}||_2 over the input system.
double residual_norm(const SystemInstance& sys, const RootTuple& z);

/// Runs every method on trials problems for each exponent in {-2, ..., 2}.
/// The exponent field of cfg is ignored. jobs > 1 spreads problems over
/// threads; results do not depend on it.
ComparisonReport run_comparison(const ProblemConfig& cfg, const SolverConfig& solver = {},
                                std::size_t jobs = 1);

/// Aggregates per-problem outcomes; exposed for tests.
std::vector<ComparisonRow> aggregate(const std::vector<std::array<ProblemOutcome, 4>>& outcomes,
                                     std::size_t* common = nullptr);

enum class TableFormat { Csv, Markdown };

std::vector<std::string> table_columns();

/// 3 significant digits, scientific below 1e-3 and from 1e4 on ("4.70e-7").
std::string format_number(double v);

std::string emit_table(const std::vector<ComparisonRow>& rows, TableFormat format);

/// Table plus the common-convergence footer.
std::string emit_report(const ComparisonReport& report, TableFormat format);

enum class CounterKind { Input, Basis, Arithmetic };

std::string_view counter_name(CounterKind c);

struct ComplexityCase {
  std::size_t equations = 7;
  std::size_t variables = 3;
  std::size_t roots = 2;
  unsigned degree = 2;
};

struct ComplexityGrid {
  ComplexityCase base;
  std::size_t trials = 3;
  std::uint64_t seed = 7;
  double factor = 1.5;
  unsigned beta = 40;
};

struct ComplexityMeasurement {
  Method method = Method::SimplifiedGaussNewton;
  CounterKind counter = CounterKind::Input;
  std::string varied;  // "k", "n" or "N"
  double observed = 0.0;
  double predicted = 0.0;
  bool within = false;
};

struct ComplexityReport {
  std::vector<ComplexityMeasurement> rows;
  bool ok() const;
};

/// Work model used as the prediction for each method and counter.
double predicted_work(Method method, CounterKind counter, const ComplexityCase& c, unsigned beta);

/// Mean counters of one step from the generated initial guess.
EvaluationCounters measure_step(Method method, const ComplexityCase& c, std::size_t trials,
                                std::uint64_t seed, unsigned beta);

/// Doubles k, n and N in turn. Never throws on a bad ratio.
ComplexityReport measure_complexity(const ComplexityGrid& grid);

/// As measure_complexity but throws ScalingViolation on the first ratio
/// outside the allowed factor.
ComplexityReport verify_complexity(const ComplexityGrid& grid);

std::string emit_complexity(const ComplexityReport& report, TableFormat format);

}  // namespace ncs
