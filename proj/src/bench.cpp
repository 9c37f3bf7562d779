#include "ncs/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "ncs/errors.hpp"
#include "ncs/weierstrass.hpp"

namespace ncs {

namespace {

enum Purpose : std::uint64_t { kCoefficients = 1, kRoots = 2, kPerturbation = 3, kGuess = 4 };

constexpr std::size_t kMaxAttempts = 16;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  std::uint64_t out = 1;
  for (std::uint64_t i = 1; i <= r; ++i) out = out * (n - r + i) / i;
  return out;
}

}  // namespace

void ProblemConfig::validate() const {
  if (variables < 1) throw InvalidArgument("n must be at least 1");
  if (equations <= variables) {
    throw InvalidArgument("N must exceed n (N = " + std::to_string(equations) + ", n = " +
                          std::to_string(variables) + ")");
  }
  if (roots < 1) throw InvalidArgument("k must be at least 1");
  if (trials < 1) throw InvalidArgument("trials must be at least 1");
  if (std::abs(exponent) > 300) throw InvalidArgument("perturbation exponent out of range");
  if (binomial(variables + degree, variables) < roots) {
    throw InvalidArgument("degree " + std::to_string(degree) + " in " + std::to_string(variables) +
                          " variables has fewer than k = " + std::to_string(roots) + " monomials");
  }
}

// --- RNG --------------------------------------------------------------------

std::uint64_t CounterRng::mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6A09E667F3BCC909ULL;
  for (std::uint64_t p : parts) h = mix(h ^ mix(p));
  return h;
}

std::uint64_t CounterRng::next() { return mix(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

double CounterRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double CounterRng::uniform(double lo, double hi) {
  double u = uniform();
  while (u == 0.0) u = uniform();
  return lo + (hi - lo) * u;
}

double CounterRng::normal() {
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RealVector CounterRng::unit_ball(Index dim) {
  RealVector v(dim);
  double norm = 0.0;
  while (norm == 0.0) {
    for (Index i = 0; i < dim; ++i) v(i) = normal();
    norm = v.norm();
  }
  const double radius = std::pow(uniform(), 1.0 / static_cast<double>(dim));
  return v * (radius / norm);
}

// --- generation ----------------------------------------------------------------

GeneratedProblem generate_problem(const ProblemConfig& cfg, std::size_t trial) {
  cfg.validate();
  const std::size_t n = cfg.variables;
  const std::size_t k = cfg.roots;
  const auto full = monomials_up_to_degree(n, cfg.degree);
  const BasisSet full_basis = BasisSet::from_monomials(full);
  const BasisSet pert_basis = smallest_degree_basis(n, k);
  const auto pert_exps = graded_lex_monomials(n, k);
  const double range = std::pow(10.0, cfg.exponent);

  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto stream = [&](Purpose p) {
      return CounterRng(CounterRng::key({cfg.seed, cfg.equations, n, cfg.degree, k,
                                         static_cast<std::uint64_t>(static_cast<std::int64_t>(cfg.exponent)),
                                         trial, p, attempt, cfg.complex_roots ? 1u : 0u}));
    };

    CounterRng root_rng = stream(kRoots);
    std::vector<ComplexVector> nodes;
    for (std::size_t i = 0; i < k; ++i) {
      ComplexVector node(static_cast<Index>(n));
      for (std::size_t j = 0; j < n; ++j) {
        const double re = root_rng.uniform(-10.0, 10.0);
        const double im = cfg.complex_roots ? root_rng.uniform(-10.0, 10.0) : 0.0;
        node(static_cast<Index>(j)) = Complex(re, im);
      }
      nodes.push_back(node);
    }
    RootTuple roots(std::move(nodes));

    LagrangeCoefficients lagrange;
    try {
      lagrange = lagrange_coefficients(build_vandermonde(full_basis, roots));
      lagrange_coefficients(build_vandermonde(pert_basis, roots));
    } catch (const RankDeficient&) {
      continue;
    }

    CounterRng coef_rng = stream(kCoefficients);
    CounterRng pert_rng = stream(kPerturbation);
    std::vector<SparsePolynomial> unperturbed_polys, input_polys;
    std::vector<FunctionPtr> functions;
    double pert_sq = 0.0;
    for (std::size_t t = 0; t < cfg.equations; ++t) {
      SparsePolynomial raw(n);
      for (const auto& e : full) raw.add_term(e, coef_rng.uniform(-100.0, 100.0));
      ComplexVector values(static_cast<Index>(k));
      for (std::size_t i = 0; i < k; ++i) values(static_cast<Index>(i)) = raw.value(roots.node(i));
      const ComplexVector c = lagrange.coefficients * values;
      SparsePolynomial unperturbed = raw;
      for (std::size_t b = 0; b < full.size(); ++b) unperturbed.add_term(full[b], -c(static_cast<Index>(b)));

      SparsePolynomial input = unperturbed;
      for (const auto& e : pert_exps) {
        const double r = pert_rng.uniform(-range, range);
        pert_sq += r * r;
        input.add_term(e, r);
      }
      unperturbed_polys.push_back(std::move(unperturbed));
      input_polys.push_back(input);
      functions.push_back(std::make_shared<SparsePolynomial>(std::move(input)));
    }

    CounterRng guess_rng = stream(kGuess);
    const RealVector shift = guess_rng.unit_ball(static_cast<Index>(2 * n * k));
    RootTuple guess = RootTuple::from_flat(roots.flat() + from_real(shift), n);
    return GeneratedProblem{std::move(unperturbed_polys),
                            std::move(input_polys),
                            roots,
                            SystemInstance(std::move(functions),
                                           std::vector<BasisSet>(cfg.equations, pert_basis), k),
                            std::move(guess),
                            std::sqrt(pert_sq),
                            attempt + 1};
  }
  throw GenerationDegenerate("no nondegenerate root draw after " + std::to_string(kMaxAttempts) +
                             " attempts (trial " + std::to_string(trial) + ")");
}

// --- comparison ---------------------------------------------------------------

double residual_norm(const SystemInstance& sys, const RootTuple& z) {
  double sum = 0.0;
  for (std::size_t t = 0; t < sys.equations(); ++t) {
    for (std::size_t i = 0; i < z.size(); ++i) sum += std::norm(sys.function(t).value(z.node(i)));
  }
  return std::sqrt(sum);
}

namespace {

double ratio(double a, double b) {
  if (b == 0.0) return a == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return a / b;
}

struct Stats {
  double min = kNan, avg = kNan, max = kNan;
};

Stats stats_of(const std::vector<double>& v) {
  if (v.empty()) return {};
  Stats s{v.front(), 0.0, v.front()};
  double sum = 0.0;
  for (double x : v) {
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
    sum += x;
  }
  s.avg = sum / static_cast<double>(v.size());
  return s;
}

std::array<ProblemOutcome, 4> solve_problem(const ProblemConfig& cfg, std::size_t trial,
                                            const SolverConfig& solver) {
  std::array<ProblemOutcome, 4> out{};
  const GeneratedProblem problem = generate_problem(cfg, trial);
  for (std::size_t m = 0; m < kAllMethods.size(); ++m) {
    const auto result = run(kAllMethods[m], problem.system, problem.initial_guess, solver);
    auto& o = out[m];
    o.converged = result.status == Status::Converged;
    o.iterations = result.iterations();
    if (o.converged) {
      o.residual = residual_norm(problem.system, result.z);
      o.output_norm = std::sqrt(result.objective);
    }
  }
  return out;
}

}  // namespace

std::vector<ComparisonRow> aggregate(const std::vector<std::array<ProblemOutcome, 4>>& outcomes,
                                     std::size_t* common_out) {
  std::vector<std::size_t> common;
  for (std::size_t p = 0; p < outcomes.size(); ++p) {
    if (std::all_of(outcomes[p].begin(), outcomes[p].end(),
                    [](const ProblemOutcome& o) { return o.converged; })) {
      common.push_back(p);
    }
  }
  if (common_out) *common_out = common.size();

  std::vector<ComparisonRow> rows;
  for (std::size_t m = 0; m < kAllMethods.size(); ++m) {
    ComparisonRow row;
    row.method = kAllMethods[m];
    std::size_t converged = 0;
    for (const auto& o : outcomes) converged += o[m].converged ? 1 : 0;
    row.converged_percent =
        outcomes.empty() ? kNan : 100.0 * static_cast<double>(converged) / static_cast<double>(outcomes.size());

    std::vector<double> rel_res, abs_res, rel_out, abs_out, iters;
    for (std::size_t p : common) {
      const auto& o = outcomes[p][m];
      const auto& base = outcomes[p][0];
      rel_res.push_back(ratio(o.residual, base.residual));
      abs_res.push_back(o.residual);
      rel_out.push_back(ratio(o.output_norm, base.output_norm));
      abs_out.push_back(o.output_norm);
      iters.push_back(static_cast<double>(o.iterations));
    }
    const Stats rr = stats_of(rel_res), ar = stats_of(abs_res), ro = stats_of(rel_out),
                ao = stats_of(abs_out), it = stats_of(iters);
    row.rel_residual_min = rr.min;
    row.rel_residual_avg = rr.avg;
    row.rel_residual_max = rr.max;
    row.abs_residual_min = ar.min;
    row.abs_residual_max = ar.max;
    row.rel_output_min = ro.min;
    row.rel_output_avg = ro.avg;
    row.rel_output_max = ro.max;
    row.abs_output_min = ao.min;
    row.abs_output_avg = ao.avg;
    row.abs_output_max = ao.max;
    row.iterations_avg = it.avg;
    rows.push_back(row);
  }
  return rows;
}

ComparisonReport run_comparison(const ProblemConfig& cfg, const SolverConfig& solver, std::size_t jobs) {
  ProblemConfig base = cfg;
  base.exponent = 0;
  base.validate();
  solver.validate();

  constexpr int kExponents[] = {-2, -1, 0, 1, 2};
  const std::size_t total = std::size(kExponents) * cfg.trials;
  ComparisonReport report;
  report.outcomes.resize(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t p = next++; p < total; p = next++) {
      ProblemConfig pc = base;
      pc.exponent = kExponents[p / cfg.trials];
      try {
        report.outcomes[p] = solve_problem(pc, p % cfg.trials, solver);
      } catch (const GenerationDegenerate&) {
        report.outcomes[p] = {};
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, total == 0 ? 1 : total);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  report.total_problems = total;
  report.rows = aggregate(report.outcomes, &report.common_converged);
  return report;
}

// --- tables -------------------------------------------------------------------

std::vector<std::string> table_columns() {
  return {"Method",           "% Converged",         "Rel Residual Min",    "Rel Residual Avg",
          "Rel Residual Max", "Abs Resid Min",       "Abs Resid Max",       "Rel Output Norm Min",
          "Rel Output Norm Avg", "Rel Output Norm Max", "Abs Output Norm Min", "Abs Output Norm Avg",
          "Abs Output Norm Max", "Iter Cnt"};
}

std::string format_number(double v) {
  if (std::isnan(v)) return "-";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  // Round to 3 significant digits first so the exponent reflects the rounding.
  std::snprintf(buf, sizeof buf, "%.2e", v);
  const int exp10 = std::atoi(std::strchr(buf, 'e') + 1);
  if (exp10 < -3 || exp10 >= 4) {
    *std::strchr(buf, 'e') = '\0';
    return std::string(buf) + "e" + std::to_string(exp10);
  }
  const int decimals = std::max(0, 2 - exp10);
  std::snprintf(buf, sizeof buf, "%.*f", decimals, std::strtod(buf, nullptr));
  return buf;
}

namespace {

std::vector<std::string> row_cells(const ComparisonRow& r) {
  return {std::string(method_label(r.method)),
          format_number(r.converged_percent),
          format_number(r.rel_residual_min),
          format_number(r.rel_residual_avg),
          format_number(r.rel_residual_max),
          format_number(r.abs_residual_min),
          format_number(r.abs_residual_max),
          format_number(r.rel_output_min),
          format_number(r.rel_output_avg),
          format_number(r.rel_output_max),
          format_number(r.abs_output_min),
          format_number(r.abs_output_avg),
          format_number(r.abs_output_max),
          format_number(r.iterations_avg)};
}

std::string join(const std::vector<std::string>& cells, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += sep;
    out += cells[i];
  }
  return out;
}

std::string render(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& body, TableFormat format) {
  std::string out;
  if (format == TableFormat::Csv) {
    out += join(header, ",") + "\n";
    for (const auto& r : body) out += join(r, ",") + "\n";
    return out;
  }
  out += "| " + join(header, " | ") + " |\n";
  out += "|" + join(std::vector<std::string>(header.size(), "---"), "|") + "|\n";
  for (const auto& r : body) out += "| " + join(r, " | ") + " |\n";
  return out;
}

}  // namespace

std::string emit_table(const std::vector<ComparisonRow>& rows, TableFormat format) {
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) body.push_back(row_cells(r));
  return render(table_columns(), body, format);
}

std::string emit_report(const ComparisonReport& report, TableFormat format) {
  std::string footer = "problems for which all methods converged: " + std::to_string(report.common_converged);
  if (format == TableFormat::Csv) return emit_table(report.rows, format) + "# " + footer + "\n";
  return emit_table(report.rows, format) + "\n" + footer + "\n";
}

// --- complexity ---------------------------------------------------------------

std::string_view counter_name(CounterKind c) {
  switch (c) {
    case CounterKind::Input: return "input-evaluations";
    case CounterKind::Basis: return "basis-evaluations";
    case CounterKind::Arithmetic: return "arithmetic-ops";
  }
  return "?";
}

bool ComplexityReport::ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const ComplexityMeasurement& m) { return m.within; });
}

double predicted_work(Method method, CounterKind counter, const ComplexityCase& c, unsigned beta) {
  const double big_n = static_cast<double>(c.equations);
  const double n = static_cast<double>(c.variables);
  const double k = static_cast<double>(c.roots);
  const double b = static_cast<double>(beta);
  const double evals = [&] {
    switch (method) {
      case Method::SimplifiedGaussNewton:
      case Method::StandardGaussNewton: return big_n * k * n;
      case Method::Quadratic: return big_n * k * n * n;
      case Method::ConjugateGradient: return big_n * k * (n + b);
    }
    return 0.0;
  }();
  switch (counter) {
    case CounterKind::Input: return evals;
    case CounterKind::Basis: return evals * k;
    case CounterKind::Arithmetic:
      switch (method) {
        // max(a, b) and a + b have the same order; the sum is the smoother model.
        case Method::SimplifiedGaussNewton: return big_n * k * k * k + big_n * k * n * n;
        // Setup of the nk x nk system plus its solution.
        case Method::StandardGaussNewton:
        case Method::Quadratic: return big_n * k * k * k * n * n + k * k * k * n * n * n;
        case Method::ConjugateGradient: return big_n * k * k * k * (n + b);
      }
  }
  return 0.0;
}

EvaluationCounters measure_step(Method method, const ComplexityCase& c, std::size_t trials,
                                std::uint64_t seed, unsigned beta) {
  ProblemConfig pc;
  pc.equations = c.equations;
  pc.variables = c.variables;
  pc.degree = c.degree;
  pc.roots = c.roots;
  pc.exponent = -2;
  pc.trials = std::max<std::size_t>(trials, 1);
  pc.seed = seed;
  SolverConfig solver;
  solver.beta = beta;

  EvaluationCounters sum;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto problem = generate_problem(pc, t);
    SolverState state{problem.initial_guess, 0, {}, std::nullopt};
    switch (method) {
      case Method::SimplifiedGaussNewton: step_simplified_gn(problem.system, state.z, &state.counters); break;
      case Method::StandardGaussNewton: step_standard_gn(problem.system, state.z, &state.counters); break;
      case Method::Quadratic: step_quadratic(problem.system, state.z, solver, &state.counters); break;
      case Method::ConjugateGradient: step_conjugate_gradient(problem.system, state, solver); break;
    }
    sum += state.counters;
  }
  if (trials > 0) {
    sum.input_evaluations /= trials;
    sum.basis_evaluations /= trials;
    sum.arithmetic_ops /= trials;
  }
  return sum;
}

namespace {

double counter_value(const EvaluationCounters& c, CounterKind kind) {
  switch (kind) {
    case CounterKind::Input: return static_cast<double>(c.input_evaluations);
    case CounterKind::Basis: return static_cast<double>(c.basis_evaluations);
    case CounterKind::Arithmetic: return static_cast<double>(c.arithmetic_ops);
  }
  return 0.0;
}

}  // namespace

ComplexityReport measure_complexity(const ComplexityGrid& grid) {
  ComplexityReport report;
  if (grid.trials == 0) return report;

  struct Variant {
    std::string name;
    ComplexityCase c;
  };
  std::vector<Variant> variants;
  variants.push_back({"k", grid.base});
  variants.back().c.roots *= 2;
  variants.push_back({"n", grid.base});
  variants.back().c.variables *= 2;
  variants.push_back({"N", grid.base});
  variants.back().c.equations *= 2;

  for (Method method : kAllMethods) {
    const auto base = measure_step(method, grid.base, grid.trials, grid.seed, grid.beta);
    for (const auto& v : variants) {
      const auto doubled = measure_step(method, v.c, grid.trials, grid.seed, grid.beta);
      for (CounterKind kind : {CounterKind::Input, CounterKind::Basis, CounterKind::Arithmetic}) {
        ComplexityMeasurement m;
        m.method = method;
        m.counter = kind;
        m.varied = v.name;
        m.observed = counter_value(doubled, kind) / counter_value(base, kind);
        m.predicted = predicted_work(method, kind, v.c, grid.beta) /
                      predicted_work(method, kind, grid.base, grid.beta);
        const double q = m.observed / m.predicted;
        m.within = q <= grid.factor && q >= 1.0 / grid.factor;
        report.rows.push_back(m);
      }
    }
  }
  return report;
}

ComplexityReport verify_complexity(const ComplexityGrid& grid) {
  auto report = measure_complexity(grid);
  for (const auto& m : report.rows) {
    if (!m.within) {
      std::ostringstream msg;
      msg << method_name(m.method) << " " << counter_name(m.counter) << " when doubling " << m.varied
          << ": observed ratio " << m.observed << ", predicted " << m.predicted;
      throw ScalingViolation(msg.str());
    }
  }
  return report;
}

std::string emit_complexity(const ComplexityReport& report, TableFormat format) {
  std::vector<std::vector<std::string>> body;
  for (const auto& m : report.rows) {
    body.push_back({std::string(method_name(m.method)), std::string(counter_name(m.counter)), m.varied,
                    format_number(m.observed), format_number(m.predicted), m.within ? "yes" : "no"});
  }
  return render({"method", "counter", "doubled", "observed ratio", "predicted ratio", "within"}, body,
                format);
}

}  // namespace ncs
