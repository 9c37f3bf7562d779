// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ncs/bench.hpp"
#include "ncs/errors.hpp"
#include "ncs/solvers.hpp"
#include "support.hpp"

using namespace ncs;
using testing_support::Rng;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

char buf[512];

template <class... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. Lagrange functions evaluate to the Kronecker delta at the nodes.
Verdict lagrange_delta() {
  Rng rng(1001);
  double worst = 0.0;
  int instances = 0;
  while (instances < 200) {
    const std::size_t n = testing_support::pick(rng, 1, 3);
    const std::size_t k = testing_support::pick(rng, 1, 5);
    const std::size_t m = k + testing_support::pick(rng, 0, 3);
    const auto basis = BasisSet::from_monomials(testing_support::random_monomial_support(rng, n, 4, m));
    if (basis.size() < k) continue;
    const auto z = testing_support::random_nodes(rng, k, n);
    LagrangeCoefficients lag;
    try {
      lag = lagrange_coefficients(build_vandermonde(basis, z));
    } catch (const RankDeficient&) {
      continue;  // nodes outside R_B; draw again
    }
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        worst = std::max(worst, std::abs(lag.evaluate(basis, i, z.node(j)) - (i == j ? 1.0 : 0.0)));
    ++instances;
  }
  return {worst <= 1e-8, fmt("200 instances, max |L_i(z_j) - delta_ij| = %.2e", worst)};
}

// 2. The library interpolant beats every sampled feasible interpolant.
Verdict minimal_norm() {
  Rng rng(1002);
  double worst_slack = -1e300;
  double worst_form = 0.0;
  int instances = 0;
  while (instances < 50) {
    const std::size_t n = testing_support::pick(rng, 1, 2);
    const std::size_t k = testing_support::pick(rng, 1, 3);
    const std::size_t m = testing_support::pick(rng, k, 5);
    const auto basis = BasisSet::from_monomials(testing_support::random_monomial_support(rng, n, 4, m));
    if (basis.size() != m) continue;
    const auto z = testing_support::random_nodes(rng, k, n);
    const ComplexMatrix v = testing_support::reference_vandermonde(basis, z);
    const Eigen::FullPivLU<ComplexMatrix> lu(v);
    if (static_cast<std::size_t>(lu.rank()) < k) continue;

    const auto f = testing_support::random_polynomial(rng, n, 3);
    ComplexVector values(static_cast<Index>(k));
    for (std::size_t i = 0; i < k; ++i) values(static_cast<Index>(i)) = f.value(z.node(i));
    const auto p = min_norm_interpolant(f, basis, z);

    // Every feasible coefficient vector is a particular solution plus a kernel element.
    const ComplexVector particular = lu.solve(values);
    const ComplexMatrix kernel = lu.kernel();
    const bool has_kernel = static_cast<std::size_t>(lu.rank()) < m;
    for (int s = 0; s < 10000; ++s) {
      ComplexVector c = particular;
      if (has_kernel) {
        ComplexVector y(kernel.cols());
        const double scale = std::pow(10.0, testing_support::uniform(rng, -3.0, 1.0));
        for (Index q = 0; q < y.size(); ++q) y(q) = scale * testing_support::random_complex(rng);
        c += kernel * y;
      }
      worst_slack = std::max(worst_slack, p.norm() - c.norm());
    }

    const ComplexMatrix gram = v * v.adjoint();
    const double form = values.dot(gram.ldlt().solve(values)).real();
    worst_form = std::max(worst_form, std::abs(p.norm() * p.norm() - form) / std::max(1.0, form));
    ++instances;
  }
  return {worst_slack <= 1e-8 && worst_form <= 1e-8,
          fmt("50 instances x 1e4 samples, max(|p| - |sample|) = %.2e, Gram-form rel err = %.2e", worst_slack,
              worst_form)};
}

// 3. Central differences of ||W||^2 against 2 Re / -2 Im of W^* J.
Verdict gradient_consistency() {
  Rng rng(1003);
  double worst = 0.0;
  int instances = 0;
  while (instances < 100) {
    const std::size_t n = testing_support::pick(rng, 1, 2);
    const std::size_t k = testing_support::pick(rng, 1, 3);
    const auto rs = testing_support::random_system(rng, n + 2, n, k, 2, k + testing_support::pick(rng, 0, 2));
    const auto z = testing_support::random_nodes(rng, k, n);
    ComplexVector w;
    ComplexMatrix j;
    try {
      w = weierstrass_map(rs.system, z).stacked();
      j = jacobian(rs.system, z).matrix;
    } catch (const RankDeficient&) {
      continue;
    }
    const ComplexVector wj = j.transpose() * w.conjugate();
    RealVector analytic(2 * wj.size());
    analytic << 2.0 * wj.real(), -2.0 * wj.imag();
    worst = std::max(worst, testing_support::relative_error(
                                analytic, testing_support::fd_real_gradient(rs.system, z, 1e-6)));
    ++instances;
  }
  return {worst <= 1e-4, fmt("100 pairs, max relative error = %.2e", worst)};
}

// 4. Normal-equation Gauss-Newton step against z - J^dagger W.
Verdict two_route_gauss_newton() {
  Rng rng(1004);
  double worst = 0.0;
  int instances = 0;
  while (instances < 100) {
    const std::size_t n = testing_support::pick(rng, 1, 3);
    const std::size_t k = testing_support::pick(rng, 1, 3);
    const auto rs = testing_support::random_system(rng, n + 2, n, k, 2, k + testing_support::pick(rng, 0, 2));
    const auto z = testing_support::random_nodes(rng, k, n);
    if (!testing_support::gauss_newton_well_posed(rs.system, z)) continue;
    RootTuple got;
    try {
      got = step_standard_gn(rs.system, z).next;
    } catch (const Error&) {
      continue;
    }
    const RootTuple ref = testing_support::reference_gn_step(rs.system, z);
    worst = std::max(worst, testing_support::relative_error(got.flat(), ref.flat()));
    ++instances;
  }
  return {worst <= 1e-8, fmt("100 instances, max relative difference = %.2e", worst)};
}

// 5. Every method started at the true roots stays there.
Verdict fixed_points() {
  Rng rng(1005);
  double worst = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = testing_support::pick(rng, 1, 2);
    const std::size_t k = testing_support::pick(rng, 1, 3);
    const auto roots = testing_support::random_nodes(rng, k, n);
    const auto rs = testing_support::consistent_system(rng, n + 2, roots, 3);
    for (Method m : kAllMethods) {
      const auto r = run(m, rs.system, roots);
      if (r.status != Status::Converged) ++failures;
      worst = std::max(worst, (r.z.flat() - roots.flat()).norm());
    }
  }
  return {failures == 0 && worst <= 1e-10,
          fmt("50 systems x 4 methods, %d not converged, max displacement = %.2e", failures, worst)};
}

// 6. Grid minimum of the objective against a grid over constant perturbations.
Verdict distance_equivalence() {
  // f = x^2 - 2x - 1/2, g = x^2 + x - 1 have no common root.
  SparsePolynomial f(1), g(1);
  f.add_term({2}, 1.0);
  f.add_term({1}, -2.0);
  f.add_term({0}, -0.5);
  g.add_term({2}, 1.0);
  g.add_term({1}, 1.0);
  g.add_term({0}, -1.0);
  const auto one = BasisSet::from_monomials({{0}});
  const SystemInstance sys({std::make_shared<SparsePolynomial>(f), std::make_shared<SparsePolynomial>(g)},
                           {one, one}, 1);

  const double h = 1e-3;
  const int steps = 10000;
  double best_z = 1e300;
  for (int s = 0; s <= steps; ++s) {
    const double x = -5.0 + s * h;
    best_z = std::min(best_z, objective(sys, RootTuple({ComplexVector::Constant(1, x)})).value);
  }

  // (c_f, c_g) is feasible when some real root r of f - c_f has |g(r) - c_g| <= h/2.
  double best_c = 1e300;
  for (int a = 0; a <= steps; ++a) {
    const double cf = -5.0 + a * h;
    const double disc = 4.0 + 4.0 * (0.5 + cf);
    if (disc < 0.0) continue;
    for (double r : {1.0 + std::sqrt(disc) / 2.0, 1.0 - std::sqrt(disc) / 2.0}) {
      const double gr = r * r + r - 1.0;
      const long nearest = std::lround((gr + 5.0) / h);
      for (long b = nearest - 1; b <= nearest + 1; ++b) {
        if (b < 0 || b > steps) continue;
        const double cg = -5.0 + b * h;
        if (std::abs(gr - cg) <= h / 2.0) best_c = std::min(best_c, cf * cf + cg * cg);
      }
    }
  }
  const double gap = std::abs(best_z - best_c);
  return {gap <= 1e-2, fmt("z-grid min = %.6f, perturbation-grid min = %.6f, gap = %.2e", best_z, best_c, gap)};
}

// 7. Statistical patterns of the four-method comparison.
Verdict benchmark_patterns() {
  ProblemConfig one;
  one.trials = 10;
  const auto a = run_comparison(one);
  bool ok = a.total_problems == 50;
  double min_conv = 100.0, max_iter = 0.0, simp_dev = 0.0;
  for (const auto& r : a.rows) {
    min_conv = std::min(min_conv, r.converged_percent);
    max_iter = std::max(max_iter, r.iterations_avg);
  }
  const auto& s = a.rows[0];
  simp_dev = std::max({std::abs(s.rel_residual_min - 1.0), std::abs(s.rel_residual_avg - 1.0),
                       std::abs(s.rel_residual_max - 1.0)});
  ok = ok && min_conv >= 90.0 && simp_dev == 0.0 && max_iter <= 10.0;

  ProblemConfig two;
  two.variables = 2;
  two.roots = 2;
  two.degree = 2;
  two.trials = 10;
  const auto b = run_comparison(two);
  const auto& std_gn = b.rows[1];
  const auto& cg = b.rows[3];
  ok = ok && b.common_converged > 0 && std_gn.rel_output_avg < 1.0 && std_gn.rel_residual_avg >= 1.0 &&
       cg.rel_residual_avg > std_gn.rel_residual_avg;
  return {ok, fmt("n=1: min converged %.0f%%, simp rel residual dev %.1e, max avg iter %.2f; "
                  "n=2,k=2 (%zu common): std rel output %.3f, std rel residual %.3f, cg rel residual %.3f",
                  min_conv, simp_dev, max_iter, b.common_converged, std_gn.rel_output_avg,
                  std_gn.rel_residual_avg, cg.rel_residual_avg)};
}

// 8. Counter growth under doubling of k, n and N.
Verdict complexity_scaling() {
  const auto report = measure_complexity({});
  bool exact = true;
  for (const auto& m : report.rows) {
    const bool gn = m.method == Method::SimplifiedGaussNewton || m.method == Method::StandardGaussNewton;
    if (gn && m.varied == "k" && m.counter == CounterKind::Input) exact = exact && m.observed == 2.0;
    if (gn && m.varied == "k" && m.counter == CounterKind::Basis) exact = exact && m.observed == 4.0;
  }
  std::size_t within = 0;
  for (const auto& m : report.rows) within += m.within ? 1 : 0;
  double quad_n = 0.0;
  for (const auto& m : report.rows)
    if (m.method == Method::Quadratic && m.varied == "n" && m.counter == CounterKind::Input) quad_n = m.observed;
  return {report.ok() && exact && !report.rows.empty(),
          fmt("%zu/%zu ratios within factor 1.5, G-N k-doubling exact: %s, quadratic n-doubling input ratio %.2f",
              within, report.rows.size(), exact ? "yes" : "no", quad_n)};
}

// 9. Error slope of standard Gauss-Newton on zero-residual problems.
Verdict quadratic_convergence() {
  Rng rng(1009);
  double worst = 1e300;
  int usable = 0;
  std::vector<double> slopes;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = testing_support::pick(rng, 1, 2);
    const std::size_t k = testing_support::pick(rng, 1, 2);
    const auto roots = testing_support::random_nodes(rng, k, n);
    const auto rs = testing_support::consistent_system(rng, n + 2, roots, 3);
    ComplexVector dir = testing_support::random_matrix(rng, static_cast<Index>(n * k), 1);
    dir.normalize();
    RootTuple z = RootTuple::from_flat(roots.flat() + 1e-2 * dir, n);

    std::vector<double> errors{(z.flat() - roots.flat()).norm()};
    for (int it = 0; it < 12 && errors.back() >= 1e-12; ++it) {
      z = step_standard_gn(rs.system, z).next;
      errors.push_back((z.flat() - roots.flat()).norm());
    }
    // Least-squares slope of log e_{t+1} against log e_t over the final
    // three iterations, counting only errors >= 1e-12.
    std::vector<double> kept;
    for (double e : errors)
      if (e >= 1e-12) kept.push_back(std::log(e));
    if (kept.size() < 3) {
      worst = std::min(worst, 0.0);
      continue;
    }
    const std::size_t pairs = std::min<std::size_t>(3, kept.size() - 1);
    double mx = 0.0, my = 0.0;
    for (std::size_t p = kept.size() - 1 - pairs; p + 1 < kept.size(); ++p) {
      mx += kept[p];
      my += kept[p + 1];
    }
    mx /= static_cast<double>(pairs);
    my /= static_cast<double>(pairs);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t p = kept.size() - 1 - pairs; p + 1 < kept.size(); ++p) {
      sxy += (kept[p] - mx) * (kept[p + 1] - my);
      sxx += (kept[p] - mx) * (kept[p] - mx);
    }
    worst = std::min(worst, sxy / sxx);
    slopes.push_back(sxy / sxx);
    ++usable;
  }
  std::sort(slopes.begin(), slopes.end());
  const double median = slopes.empty() ? 0.0 : slopes[slopes.size() / 2];
  return {usable == 20 && worst >= 1.8,
          fmt("20 instances, minimum log-log slope = %.3f, median = %.3f", worst, median)};
}

// 10. Stopping rules on synthetic step-norm sequences and the iteration cap.
Verdict controller() {
  using V = ConvergenceMonitor::Verdict;
  SolverConfig cfg;
  bool ok = true;
  auto feed = [&](bool divergence, std::initializer_list<double> steps) {
    ConvergenceMonitor m(cfg, divergence);
    V last = V::Continue;
    for (double s : steps) last = m.record(s);
    return last;
  };
  ok = ok && feed(true, {0.5, 0.0005, 0.0004}) == V::Converged;
  ok = ok && feed(true, {0.0005, 0.002, 0.0004}) == V::Continue;
  ok = ok && feed(true, {0.0005}) == V::Continue;
  for (Method m : kAllMethods) {
    const V expected = uses_divergence_test(m) ? V::Diverged : V::Continue;
    ok = ok && feed(uses_divergence_test(m), {0.01, 0.02, 0.04}) == expected;
  }
  ok = ok && feed(true, {0.04, 0.02, 0.02, 0.04}) == V::Continue;

  // Unbounded descent: f = g = exp(x) keeps a constant step for every method.
  auto e = std::make_shared<BlackBoxFunction>(
      1, [](const ComplexVector& x) { return std::exp(x(0)); },
      [](const ComplexVector& x) { return ComplexVector::Constant(1, std::exp(x(0))); },
      [](const ComplexVector& x) { return ComplexMatrix::Constant(1, 1, std::exp(x(0))); });
  const auto one = BasisSet::from_monomials({{0}});
  const SystemInstance sys({e, e}, {one, one}, 1);
  const auto r = run(Method::Quadratic, sys, RootTuple({ComplexVector::Zero(1)}));
  ok = ok && r.status == Status::MaxIterations && r.iterations() == 128;
  return {ok, fmt("synthetic step sequences match; capped run: %s after %zu iterations",
                  std::string(status_name(r.status)).c_str(), r.iterations())};
}

struct Criterion {
  const char* name;
  double limit_seconds;  // 0 means no limit
  std::function<Verdict()> check;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"lagrange delta", 5.0, lagrange_delta},
      {"minimal-norm oracle", 30.0, minimal_norm},
      {"gradient consistency", 0.0, gradient_consistency},
      {"two-route gauss-newton", 0.0, two_route_gauss_newton},
      {"fixed points", 0.0, fixed_points},
      {"distance equivalence", 60.0, distance_equivalence},
      {"benchmark patterns", 600.0, benchmark_patterns},
      {"complexity scaling", 120.0, complexity_scaling},
      {"quadratic convergence", 0.0, quadratic_convergence},
      {"convergence controller", 0.0, controller},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_seconds == 0.0 || seconds < c.limit_seconds;
    const bool pass = v.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s %2d %s: %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", index, c.name, v.detail.c_str(), seconds,
                in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
