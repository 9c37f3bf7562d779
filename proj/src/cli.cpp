#include "ncs/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "ncs/bench.hpp"
#include "ncs/errors.hpp"
#include "ncs/io.hpp"

namespace ncs::cli {

namespace {

std::string load_input(const std::string& input) {
  const auto first = input.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (input[first] == '{' || input[first] == '[')) return input;
  return io::read_file(input);
}

// Writes to --output when given, else to out.
void emit(const CliInvocation& inv, std::ostream& out, const std::string& text) {
  if (inv.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(inv.output, std::ios::binary);
  if (!file) throw io::InputError("cannot write " + inv.output);
  file << text;
}

std::vector<Method> selected_methods(const std::string& name) {
  if (name == "all") return {kAllMethods.begin(), kAllMethods.end()};
  const auto m = parse_method(name);
  if (!m) throw io::InputError("unknown method \"" + name + "\"");
  return {*m};
}

RootTuple random_near(const RootTuple& center, double radius, std::uint64_t seed) {
  CounterRng rng(CounterRng::key({seed, 0x6775657373ULL}));
  const auto d = static_cast<Index>(2 * center.size() * center.variables());
  const RealVector shift = radius * rng.unit_ball(d);
  return RootTuple::from_flat(center.flat() + from_real(shift), center.variables());
}

RootTuple resolve_guess(const CliInvocation& inv, const io::SystemFile& file) {
  const std::size_t n = file.system.variables();
  const std::size_t k = file.system.roots();
  if (inv.guess_file) {
    auto g = io::guess_from_json(io::parse_json(io::read_file(*inv.guess_file)), n);
    if (g.size() != k) {
      throw io::InputError("guess has " + std::to_string(g.size()) + " nodes, expected k = " +
                           std::to_string(k));
    }
    return g;
  }
  if (file.initial_guess && file.initial_guess->size() != k) {
    throw io::InputError("\"initial_guess\" has " + std::to_string(file.initial_guess->size()) +
                         " nodes, expected k = " + std::to_string(k));
  }
  const std::uint64_t seed = inv.seed.value_or(1);
  if (inv.near_radius) {
    const RootTuple center =
        file.initial_guess ? *file.initial_guess
                           : RootTuple(std::vector<ComplexVector>(k, ComplexVector::Zero(static_cast<Index>(n))));
    return random_near(center, *inv.near_radius, seed);
  }
  if (file.initial_guess) return *file.initial_guess;
  // No guess anywhere: distinct random nodes in the unit ball around 0.
  return random_near(RootTuple(std::vector<ComplexVector>(k, ComplexVector::Zero(static_cast<Index>(n)))), 1.0,
                     seed);
}

std::string solve_csv(const std::vector<SolverResult>& results) {
  std::ostringstream s;
  s.precision(17);
  s << "method,status,iterations,objective,node,variable,re,im\n";
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.z.size(); ++i) {
      for (std::size_t j = 0; j < r.z.variables(); ++j) {
        const Complex c = r.z.node(i)(static_cast<Index>(j));
        s << method_name(r.method) << ',' << status_name(r.status) << ',' << r.iterations() << ','
          << r.objective << ',' << i << ',' << j << ',' << c.real() << ',' << c.imag() << '\n';
      }
    }
  }
  return s.str();
}

std::string solve_markdown(const std::vector<SolverResult>& results) {
  std::ostringstream s;
  s.precision(17);
  for (const auto& r : results) {
    s << "## " << method_label(r.method) << "\n\n"
      << "- status: " << status_name(r.status) << (r.stalled ? " (stalled)" : "") << "\n"
      << "- iterations: " << r.iterations() << "\n"
      << "- objective: " << r.objective << "\n"
      << "- input evaluations: " << r.counters.input_evaluations << "\n"
      << "- basis evaluations: " << r.counters.basis_evaluations << "\n"
      << "- arithmetic ops: " << r.counters.arithmetic_ops << "\n\n"
      << "| node | variable | re | im |\n|---|---|---|---|\n";
    for (std::size_t i = 0; i < r.z.size(); ++i) {
      for (std::size_t j = 0; j < r.z.variables(); ++j) {
        const Complex c = r.z.node(i)(static_cast<Index>(j));
        s << "| " << i << " | " << j << " | " << c.real() << " | " << c.imag() << " |\n";
      }
    }
    s << "\n";
  }
  return s.str();
}

TableFormat table_format(const std::string& f) {
  if (f == "csv") return TableFormat::Csv;
  if (f == "markdown") return TableFormat::Markdown;
  throw io::InputError("format \"" + f + "\" is not supported here");
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const io::InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace

int solve_command(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (inv.input.empty()) throw io::InputError("solve needs --input");
    inv.solver.validate();
    const auto methods = selected_methods(inv.method);
    const auto file = io::system_from_json(io::parse_json(load_input(inv.input)), inv.k);
    const RootTuple guess = resolve_guess(inv, file);

    std::vector<SolverResult> results;
    bool all_converged = true;
    for (Method m : methods) {
      results.push_back(run(m, file.system, guess, inv.solver));
      const auto& r = results.back();
      if (r.status != Status::Converged) {
        all_converged = false;
        err << method_name(m) << ": " << status_name(r.status);
        if (!r.diagnostic.empty()) err << ": " << r.diagnostic;
        err << "\n";
      }
    }

    const std::string format = inv.format.value_or("json");
    if (format == "json") {
      io::Json doc{{"results", io::Json::array()}};
      for (const auto& r : results) doc["results"].push_back(io::result_to_json(r));
      emit(inv, out, doc.dump(2) + "\n");
    } else if (format == "csv") {
      emit(inv, out, solve_csv(results));
    } else if (format == "markdown") {
      emit(inv, out, solve_markdown(results));
    } else {
      throw io::InputError("unknown format \"" + format + "\"");
    }
    return all_converged ? kExitOk : kExitNumerical;
  });
}

int bench_command(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ProblemConfig cfg;
    if (!inv.input.empty()) cfg = io::bench_config_from_json(io::parse_json(load_input(inv.input)));
    if (inv.seed) cfg.seed = *inv.seed;
    if (inv.k) cfg.roots = *inv.k;
    cfg.validate();
    inv.solver.validate();

    const auto report = run_comparison(cfg, inv.solver, inv.jobs);
    const std::string format = inv.format.value_or("markdown");
    if (format == "json") {
      io::Json rows = io::Json::array();
      const auto columns = table_columns();
      for (const auto& r : report.rows) {
        const double values[] = {r.converged_percent, r.rel_residual_min, r.rel_residual_avg,
                                 r.rel_residual_max,  r.abs_residual_min, r.abs_residual_max,
                                 r.rel_output_min,    r.rel_output_avg,   r.rel_output_max,
                                 r.abs_output_min,    r.abs_output_avg,   r.abs_output_max,
                                 r.iterations_avg};
        io::Json row{{columns[0], std::string(method_label(r.method))}};
        for (std::size_t c = 0; c < std::size(values); ++c) row[columns[c + 1]] = values[c];
        rows.push_back(row);
      }
      io::Json doc{{"rows", rows},
                   {"common_converged", report.common_converged},
                   {"total_problems", report.total_problems}};
      emit(inv, out, doc.dump(2) + "\n");
    } else {
      emit(inv, out, emit_report(report, table_format(format)));
    }
    return kExitOk;
  });
}

int verify_complexity_command(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ComplexityGrid grid;
    if (!inv.input.empty()) {
      const auto j = io::parse_json(load_input(inv.input));
      const auto cfg = io::bench_config_from_json(j);
      if (j.contains("N")) grid.base.equations = cfg.equations;
      if (j.contains("n")) grid.base.variables = cfg.variables;
      if (j.contains("k")) grid.base.roots = cfg.roots;
      if (j.contains("D")) grid.base.degree = cfg.degree;
      if (j.contains("trials")) grid.trials = cfg.trials;
      if (j.contains("seed")) grid.seed = cfg.seed;
    }
    if (inv.seed) grid.seed = *inv.seed;
    grid.beta = inv.solver.beta;

    const auto report = measure_complexity(grid);
    emit(inv, out, emit_complexity(report, table_format(inv.format.value_or("markdown"))));
    if (report.ok()) return kExitOk;
    try {
      verify_complexity(grid);
    } catch (const ScalingViolation& e) {
      err << "scaling violation: " << e.what() << "\n";
    }
    return kExitNumerical;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nearest consistent systems via generalized Weierstrass maps"};
  app.require_subcommand(1);
  CliInvocation inv;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input", inv.input, "JSON file or inline JSON");
    sub->add_option("--k", inv.k, "Number of common roots (overrides the input)")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", inv.solver.max_iterations, "Iteration cap")->capture_default_str();
    sub->add_option("--step-tol", inv.solver.step_tolerance, "Step-norm tolerance")->capture_default_str();
    sub->add_option("--beta", inv.solver.beta, "Line-search bits for conjugate gradient")->capture_default_str();
    sub->add_option("--seed", inv.seed, "Seed for every random draw");
    sub->add_option("--format", inv.format, "json, csv or markdown")
        ->check(CLI::IsMember({"json", "csv", "markdown"}));
    sub->add_option("--output", inv.output, "Write to this file instead of standard output");
  };

  auto* solve = app.add_subcommand("solve", "Find the nearest system with k common roots");
  add_common(solve);
  solve->add_option("--method", inv.method, "simplified-gn, standard-gn, quadratic, conjugate-gradient or all")
      ->required()
      ->check(CLI::IsMember({"simplified-gn", "standard-gn", "quadratic", "conjugate-gradient", "all"}));
  solve->add_option("--guess", inv.guess_file, "Initial roots (root list or earlier solve output)");
  solve->add_option("--near", inv.near_radius, "Random start within this radius of the input guess")
      ->check(CLI::PositiveNumber);

  auto* bench = app.add_subcommand("bench", "Compare the four methods on random problems");
  add_common(bench);
  bench->add_option("--jobs", inv.jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* complexity = app.add_subcommand("verify-complexity", "Check evaluation-counter scaling");
  add_common(complexity);

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  if (solve->parsed()) return solve_command(inv, out, err);
  if (bench->parsed()) return bench_command(inv, out, err);
  return verify_complexity_command(inv, out, err);
}

}  // namespace ncs::cli
