#include "ncs/io.hpp"

#include <fstream>
#include <sstream>

namespace ncs::io {

namespace {

[[noreturn]] void fail(const std::string& what) { throw InputError(what); }

const Json& require(const Json& j, const char* field, const std::string& where) {
  if (!j.is_object()) fail(where + ": expected a JSON object");
  const auto it = j.find(field);
  if (it == j.end()) fail(where + ": missing required field \"" + field + "\"");
  return *it;
}

std::size_t as_count(const Json& j, const std::string& what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(what + " must be a nonnegative integer");
  return static_cast<std::size_t>(j.get<long long>());
}

double as_real(const Json& j, const std::string& what) {
  if (!j.is_number()) fail(what + " must be a number");
  return j.get<double>();
}

ExponentVector exponents_from_json(const Json& j, std::size_t n, const std::string& where) {
  if (!j.is_array()) fail(where + ": exponents must be an array");
  if (j.size() != n) {
    fail(where + ": exponent vector has length " + std::to_string(j.size()) + ", expected " +
         std::to_string(n));
  }
  ExponentVector e;
  for (const auto& x : j) e.push_back(static_cast<unsigned>(as_count(x, where + ": exponent")));
  return e;
}

Complex complex_from_json(const Json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_object()) fail(where + ": expected {\"re\": .., \"im\": ..}");
  const double re = j.contains("re") ? as_real(j["re"], where + ".re") : 0.0;
  const double im = j.contains("im") ? as_real(j["im"], where + ".im") : 0.0;
  return {re, im};
}

Json complex_to_json(Complex c) { return Json{{"re", c.real()}, {"im", c.imag()}}; }

}  // namespace

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw InputError("malformed JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(column),
                     line, column);
  }
}

SparsePolynomial polynomial_from_json(const Json& j) {
  const std::size_t n = as_count(require(j, "variables", "polynomial"), "\"variables\"");
  if (n == 0) fail("polynomial: \"variables\" must be at least 1");
  const Json& terms = require(j, "terms", "polynomial");
  if (!terms.is_array()) fail("polynomial: \"terms\" must be an array");
  SparsePolynomial p(n);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string where = "term " + std::to_string(i);
    const auto e = exponents_from_json(require(terms[i], "exponents", where), n, where);
    p.add_term(e, complex_from_json(terms[i], where));
  }
  return p;
}

Json polynomial_to_json(const SparsePolynomial& p) {
  Json terms = Json::array();
  for (const auto& [e, c] : p.terms()) {
    terms.push_back(Json{{"exponents", e}, {"re", c.real()}, {"im", c.imag()}});
  }
  return Json{{"variables", p.variables()}, {"terms", terms}};
}

RootTuple roots_from_json(const Json& j, std::size_t variables) {
  if (!j.is_array() || j.empty()) fail("roots: expected a nonempty array of nodes");
  std::vector<ComplexVector> nodes;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "root " + std::to_string(i);
    if (!j[i].is_array() || j[i].size() != variables) {
      fail(where + ": expected " + std::to_string(variables) + " coordinates");
    }
    ComplexVector node(static_cast<Index>(variables));
    for (std::size_t c = 0; c < variables; ++c) node(static_cast<Index>(c)) = complex_from_json(j[i][c], where);
    nodes.push_back(node);
  }
  return RootTuple(std::move(nodes));
}

Json roots_to_json(const RootTuple& z) {
  Json out = Json::array();
  for (const auto& node : z.nodes()) {
    Json coords = Json::array();
    for (Index c = 0; c < node.size(); ++c) coords.push_back(complex_to_json(node(c)));
    out.push_back(coords);
  }
  return out;
}

SystemFile system_from_json(const Json& j, std::optional<std::size_t> k_override) {
  try {
    const Json& fs = require(j, "functions", "system");
    if (!fs.is_array() || fs.empty()) fail("system: \"functions\" must be a nonempty array");
    std::size_t k = 0;
    if (k_override) {
      k = *k_override;
    } else {
      k = as_count(require(j, "k", "system"), "\"k\"");
    }
    if (k == 0) fail("system: \"k\" must be at least 1");

    std::vector<SparsePolynomial> polys;
    std::vector<FunctionPtr> functions;
    for (const auto& f : fs) {
      polys.push_back(polynomial_from_json(f));
      functions.push_back(std::make_shared<SparsePolynomial>(polys.back()));
    }
    const std::size_t n = polys.front().variables();

    std::vector<BasisSet> bases;
    if (j.contains("bases")) {
      const Json& bs = j["bases"];
      if (!bs.is_array() || bs.size() != fs.size()) fail("system: \"bases\" needs one entry per function");
      for (std::size_t t = 0; t < bs.size(); ++t) {
        const std::string where = "basis " + std::to_string(t);
        if (!bs[t].is_array()) fail(where + ": expected an array of exponent vectors");
        std::vector<ExponentVector> exps;
        for (const auto& e : bs[t]) exps.push_back(exponents_from_json(e, n, where));
        bases.push_back(BasisSet::from_monomials(exps));
      }
    } else {
      bases.assign(fs.size(), smallest_degree_basis(n, k));
    }

    std::optional<RootTuple> guess;
    if (j.contains("initial_guess")) guess = roots_from_json(j["initial_guess"], n);
    return {std::move(polys), SystemInstance(std::move(functions), std::move(bases), k), std::move(guess)};
  } catch (const Json::exception& e) {
    throw InputError(std::string("system: ") + e.what());
  }
}

Json system_to_json(const std::vector<SparsePolynomial>& functions, const std::vector<BasisSet>& bases,
                    std::size_t k, const std::optional<RootTuple>& guess) {
  Json fs = Json::array();
  for (const auto& f : functions) fs.push_back(polynomial_to_json(f));
  Json out{{"functions", fs}, {"k", k}};
  if (!bases.empty()) {
    Json bs = Json::array();
    for (const auto& b : bases) {
      const auto exps = b.monomial_exponents();
      if (!exps) throw InvalidArgument("system_to_json: only monomial bases can be written");
      bs.push_back(*exps);
    }
    out["bases"] = bs;
  }
  if (guess) out["initial_guess"] = roots_to_json(*guess);
  return out;
}

ProblemConfig bench_config_from_json(const Json& j) {
  if (!j.is_object()) fail("bench config: expected a JSON object");
  ProblemConfig cfg;
  if (j.contains("N")) cfg.equations = as_count(j["N"], "\"N\"");
  if (j.contains("n")) cfg.variables = as_count(j["n"], "\"n\"");
  if (j.contains("D")) cfg.degree = static_cast<unsigned>(as_count(j["D"], "\"D\""));
  if (j.contains("k")) cfg.roots = as_count(j["k"], "\"k\"");
  if (j.contains("trials")) cfg.trials = as_count(j["trials"], "\"trials\"");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) fail("\"seed\" must be an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("complex_roots")) {
    if (!j["complex_roots"].is_boolean()) fail("\"complex_roots\" must be true or false");
    cfg.complex_roots = j["complex_roots"].get<bool>();
  }
  return cfg;
}

Json counters_to_json(const EvaluationCounters& c) {
  return Json{{"input_evaluations", c.input_evaluations},
              {"basis_evaluations", c.basis_evaluations},
              {"arithmetic_ops", c.arithmetic_ops}};
}

Json result_to_json(const SolverResult& r) {
  Json out{{"method", std::string(method_name(r.method))},
           {"status", std::string(status_name(r.status))},
           {"iterations", r.iterations()},
           {"objective", r.objective},
           {"distance", std::sqrt(r.objective)},
           {"roots", roots_to_json(r.z)},
           {"counters", counters_to_json(r.counters)}};
  if (r.stalled) out["stalled"] = true;
  if (!r.diagnostic.empty()) out["diagnostic"] = r.diagnostic;
  Json perts = Json::array();
  for (const auto& p : r.perturbations) {
    if (auto poly = p.as_polynomial()) {
      perts.push_back(polynomial_to_json(*poly));
    } else {
      Json coeffs = Json::array();
      for (Index i = 0; i < p.coefficients().size(); ++i) coeffs.push_back(complex_to_json(p.coefficients()(i)));
      perts.push_back(Json{{"coefficients", coeffs}});
    }
  }
  out["perturbations"] = perts;
  Json trace = Json::array();
  for (const auto& t : r.trace) trace.push_back(Json{{"objective", t.objective}, {"step", t.step_norm}});
  out["trace"] = trace;
  return out;
}

RootTuple guess_from_json(const Json& j, std::size_t variables) {
  try {
    if (j.is_array()) return roots_from_json(j, variables);
    if (j.is_object() && j.contains("roots")) return roots_from_json(j["roots"], variables);
    if (j.is_object() && j.contains("results") && j["results"].is_array() && !j["results"].empty()) {
      return roots_from_json(require(j["results"][0], "roots", "guess"), variables);
    }
    if (j.is_object() && j.contains("initial_guess")) return roots_from_json(j["initial_guess"], variables);
  } catch (const Json::exception& e) {
    throw InputError(std::string("guess: ") + e.what());
  }
  fail("guess: expected a root list, an object with \"roots\", or solve output");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ncs::io
