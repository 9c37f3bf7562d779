#pragma once

// JSON formats for polynomials, systems, root tuples and benchmark configs.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ncs/bench.hpp"
#include "ncs/errors.hpp"
#include "ncs/functions.hpp"
#include "ncs/interpolation.hpp"
#include "ncs/solvers.hpp"

namespace ncs::io {

using Json = nlohmann::json;

/// Malformed or incomplete input. Line and column are 1-based and only set
/// for syntax errors.
class InputError : public InvalidArgument {
 public:
  explicit InputError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : InvalidArgument(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Parses text, reporting syntax errors with line and column.
Json parse_json(std::string_view text);

SparsePolynomial polynomial_from_json(const Json& j);
Json polynomial_to_json(const SparsePolynomial& p);

/// [[{"re": .., "im": ..}, ...], ...], one inner list per node.
RootTuple roots_from_json(const Json& j, std::size_t variables);
Json roots_to_json(const RootTuple& z);

struct SystemFile {
  std::vector<SparsePolynomial> polynomials;
  SystemInstance system;
  std::optional<RootTuple> initial_guess;
};

/// {"functions": [...], "k": int, "bases": optional, "initial_guess": optional}.
/// k_override replaces or supplies "k".
SystemFile system_from_json(const Json& j, std::optional<std::size_t> k_override = std::nullopt);

Json system_to_json(const std::vector<SparsePolynomial>& functions, const std::vector<BasisSet>& bases,
                    std::size_t k, const std::optional<RootTuple>& guess = std::nullopt);

/// {"N", "n", "D", "k", "trials", "seed"}; every field optional.
ProblemConfig bench_config_from_json(const Json& j);

Json counters_to_json(const EvaluationCounters& c);

Json result_to_json(const SolverResult& r);

/// Accepts a bare root list, an object with "roots", or solve output with
/// "results" (first entry).
RootTuple guess_from_json(const Json& j, std::size_t variables);

/// Reads a file into a string. Throws InputError when it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace ncs::io
