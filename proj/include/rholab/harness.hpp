#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rholab/derivatives.hpp"
#include "rholab/error.hpp"
#include "rholab/examples.hpp"
#include "rholab/fixtures.hpp"
#include "rholab/geometry.hpp"
#include "rholab/mappings.hpp"
#include "rholab/norm.hpp"
#include "rholab/norm_json.hpp"
#include "rholab/orthogonality.hpp"
#include "rholab/random.hpp"

namespace rholab {

enum class Suite {
  properties,
  inclusions,
  smoothness,
  characterization,
  uniform_convexity,
  mappings,
  examples
};

inline const std::vector<Suite>& all_suites() {
  static const std::vector<Suite> s{Suite::properties,       Suite::inclusions,
                                    Suite::smoothness,       Suite::characterization,
                                    Suite::uniform_convexity, Suite::mappings,
                                    Suite::examples};
  return s;
}

inline const char* to_string(Suite s) {
  switch (s) {
    case Suite::properties: return "properties";
    case Suite::inclusions: return "inclusions";
    case Suite::smoothness: return "smoothness";
    case Suite::characterization: return "characterization";
    case Suite::uniform_convexity: return "uniform_convexity";
    case Suite::mappings: return "mappings";
    case Suite::examples: return "examples";
  }
  return "unknown";
}

inline Suite parse_suite(const std::string& name) {
  for (Suite s : all_suites())
    if (name == to_string(s)) return s;
  throw Error(ErrorCode::config_error, "unknown suite '" + name + "'");
}

struct SuiteConfig {
  std::vector<NormSpec> norms = fixtures::norms(fixtures::dims());
  std::vector<double> lambdas = fixtures::lambdas();
  std::size_t trials = 10000;
  std::uint64_t seed = 42;
  double tol = 1e-8;
  double epsilon = 1.0;  // uniform-convexity separation
  DerivativeMethod method = DerivativeMethod::automatic;
  std::vector<Suite> suites = all_suites();
  std::size_t threads = 0;  // 0 picks the hardware concurrency; never affects results

  void validate() const {
    auto bad = [](const std::string& path, const std::string& msg) {
      throw Error(ErrorCode::config_error, "at " + path + ": " + msg);
    };
    if (trials < 1) bad("/trials", "trials must be >= 1");
    if (!(tol > 0.0)) bad("/tol", "tol must be > 0");
    if (!(epsilon > 0.0 && epsilon <= 2.0)) bad("/epsilon", "epsilon must lie in (0, 2]");
    if (suites.empty()) bad("/suites", "at least one suite is required");
    if (norms.empty()) bad("/norms", "at least one norm is required");
    if (lambdas.empty()) bad("/lambdas", "at least one lambda is required");
    for (std::size_t i = 0; i < lambdas.size(); ++i)
      if (!(lambdas[i] >= 0.0 && lambdas[i] <= 1.0))
        bad("/lambdas/" + std::to_string(i), "lambda must lie in [0, 1]");
  }
};

/// Reads a config object. Every field is optional:
///   norms: array of norm objects or "default"; dims: dimensions for the
///   default norms; lambdas; trials; seed; tol; epsilon;
///   method: "auto" | "exact" | "numerical"; suites: array of suite names.
inline SuiteConfig config_from_json(const json& j) {
  if (!j.is_object()) detail::schema_error("", "config must be a JSON object");
  SuiteConfig c;
  static const std::vector<std::string> known{"norms", "dims",   "lambdas", "trials", "seed",
                                              "tol",   "epsilon", "method", "suites"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      detail::schema_error("/" + it.key(), "unknown field");

  std::vector<std::size_t> dims = fixtures::dims();
  if (j.contains("dims")) {
    const auto& d = j["dims"];
    if (!d.is_array() || d.empty()) detail::schema_error("/dims", "expected a nonempty array");
    dims.clear();
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!d[i].is_number_unsigned() || d[i].get<std::size_t>() < 1)
        detail::schema_error("/dims/" + std::to_string(i), "expected a positive integer");
      dims.push_back(d[i].get<std::size_t>());
    }
  }
  c.norms = fixtures::norms(dims);
  if (j.contains("norms")) {
    const auto& n = j["norms"];
    if (n.is_string() && n.get<std::string>() == "default") {
      // keep the fixtures
    } else if (n.is_array()) {
      c.norms.clear();
      for (std::size_t i = 0; i < n.size(); ++i)
        c.norms.push_back(norm_from_json(n[i], 0, "/norms/" + std::to_string(i)));
    } else {
      detail::schema_error("/norms", "expected an array of norms or \"default\"");
    }
  }
  if (j.contains("lambdas")) c.lambdas = detail::scalars_from_json(j["lambdas"], "/lambdas");
  if (j.contains("trials")) {
    if (!j["trials"].is_number_integer() || j["trials"].get<std::int64_t>() < 1)
      detail::schema_error("/trials", "trials must be an integer >= 1");
    c.trials = j["trials"].get<std::size_t>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) detail::schema_error("/seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("tol")) c.tol = detail::scalar_from_json(j["tol"], "/tol");
  if (j.contains("epsilon")) c.epsilon = detail::scalar_from_json(j["epsilon"], "/epsilon");
  if (j.contains("method")) {
    const auto& m = j["method"];
    const std::string s = m.is_string() ? m.get<std::string>() : "";
    if (s == "auto") c.method = DerivativeMethod::automatic;
    else if (s == "exact") c.method = DerivativeMethod::exact;
    else if (s == "numerical") c.method = DerivativeMethod::numerical;
    else detail::schema_error("/method", "expected \"auto\", \"exact\" or \"numerical\"");
  }
  if (j.contains("suites")) {
    const auto& s = j["suites"];
    if (!s.is_array()) detail::schema_error("/suites", "expected an array of suite names");
    c.suites.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_string()) detail::schema_error("/suites/" + std::to_string(i), "expected a string");
      try {
        const Suite su = parse_suite(s[i].get<std::string>());
        if (std::find(c.suites.begin(), c.suites.end(), su) == c.suites.end()) c.suites.push_back(su);
      } catch (const Error& e) {
        detail::schema_error("/suites/" + std::to_string(i), e.what());
      }
    }
  }
  c.validate();
  return c;
}

/// Ordered from best to worst; the report status is the worst record.
enum class CheckStatus { pass, vacuous, degenerate, numerical_failure, fail };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::vacuous: return "vacuous";
    case CheckStatus::degenerate: return "degenerate";
    case CheckStatus::numerical_failure: return "numerical_failure";
    case CheckStatus::fail: return "fail";
  }
  return "unknown";
}

/// One check outcome. context holds what recompute_residual needs to rebuild
/// the residual from the witness alone.
struct CheckRecord {
  std::string check_id;
  Suite suite = Suite::properties;
  CheckStatus status = CheckStatus::pass;
  double residual = 0.0;
  std::vector<Vector> witness;
  std::string detail;
  json context = json::object();
  double runtime_ms = 0.0;
};

struct SuiteReport {
  std::vector<CheckRecord> records;
  std::uint64_t seed = 0;

  std::map<CheckStatus, std::size_t> counts() const {
    std::map<CheckStatus, std::size_t> c;
    for (CheckStatus s : {CheckStatus::pass, CheckStatus::vacuous, CheckStatus::degenerate,
                          CheckStatus::numerical_failure, CheckStatus::fail})
      c[s] = 0;
    for (const auto& r : records) ++c[r.status];
    return c;
  }

  /// 0 all pass/vacuous/degenerate, 1 any fail, 3 numerical failures only.
  int exit_code() const {
    const auto c = counts();
    if (c.at(CheckStatus::fail) > 0) return 1;
    if (c.at(CheckStatus::numerical_failure) > 0) return 3;
    return 0;
  }
};

namespace detail {

inline json vectors_to_json(const std::vector<Vector>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(std::vector<double>(v.coords().begin(), v.coords().end()));
  return a;
}

inline std::vector<Vector> vectors_from_json(const json& j) {
  std::vector<Vector> out;
  for (const auto& v : j) out.emplace_back(v.get<std::vector<double>>());
  return out;
}

// FNV-1a, so per-check streams depend only on the check id.
inline std::uint64_t stable_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline double norm_product(const NormSpec& n, const Vector& x, const Vector& y) {
  return eval_norm(n, x) * eval_norm(n, y);
}

inline const std::vector<double>& shift_steps() {
  static const std::vector<double> t{-2.0, -0.5, 0.5, 2.0};
  return t;
}

inline const std::vector<double>& scale_steps() {
  static const std::vector<double> t{2.0, 0.5, 1.0, -1.0, -0.5, -2.0};
  return t;
}

// Worst normalized slack of the pointwise properties: homogeneity in each
// argument (with lambda -> 1 - lambda for negative factors), the shift
// identity, and the two-sided bounds. Negative means violated.
inline double property_slack(const NormSpec& n, Lambda l, const Vector& x, const Vector& y,
                             DerivativeMethod method, bool* converged = nullptr) {
  const double nx = eval_norm(n, x), ny = eval_norm(n, y);
  const double scale = nx * ny;
  bool ok = true;
  auto rl = [&](const Vector& a, const Vector& b, Lambda w) {
    const auto p = rho_pair(n, a, b, method);
    ok = ok && p.converged;
    return p.rho_lambda(w);
  };
  const double base = rl(x, y, l);
  const double base_c = rl(x, y, l.complement());
  double worst = std::numeric_limits<double>::infinity();
  for (double t : scale_steps()) {
    const double expect = t > 0 ? t * base : t * base_c;
    worst = std::min(worst, -std::abs(rl(t * x, y, l) - expect) / (std::abs(t) * scale));
    worst = std::min(worst, -std::abs(rl(x, t * y, l) - expect) / (std::abs(t) * scale));
  }
  for (double t : shift_steps()) {
    const double lhs = rl(x, axpy(y, t, x), l);
    worst = std::min(worst, -std::abs(lhs - t * nx * nx - base) / (nx * (ny + std::abs(t) * nx)));
  }
  const auto m = rho_bounds_margins(n, l, x, y, method);
  worst = std::min(worst, m.min() / scale);
  if (converged) *converged = ok;
  return worst;
}

inline double relative_quartic(const NormSpec& n, Lambda l, const Vector& x, const Vector& y) {
  const double nx = eval_norm(n, x), ny = eval_norm(n, y);
  return std::abs(quartic_identity_defect(n, l, x, y)) / (std::pow(nx, 4) + std::pow(ny, 4));
}

inline double symmetry_gap(const NormSpec& n, Lambda l, const Vector& x, const Vector& y) {
  return std::abs(rho_pair(n, x, y).rho_lambda(l) - rho_pair(n, y, x).rho_lambda(l)) /
         norm_product(n, x, y);
}

inline double preserve_residual(const LinearMap& t, Lambda l, const Vector& x, const Vector& z) {
  const Vector tx = t(x), tz = t(z);
  return std::abs(rho_pair(t.codomain(), tx, tz).rho_lambda(l)) /
         norm_product(t.codomain(), tx, tz);
}

inline double ratio_of(const NormSpec& n1, const NormSpec& n2, Lambda l, const Vector& x,
                       const Vector& y) {
  return std::abs(rho_pair(n2, x, y).rho_lambda(l)) / std::abs(rho_pair(n1, x, y).rho_lambda(l));
}

inline double break_residual(const NormSpec& n2, Lambda l, const Vector& x, const Vector& z) {
  return std::abs(rho_pair(n2, x, z).rho_lambda(l)) / norm_product(n2, x, z);
}

inline std::string lambda_tag(double l) { return "lambda=" + format_scalar(l); }

}  // namespace detail

/// Rebuilds a record's residual from its witness and context. Returns
/// nothing for records without a witness.
inline std::optional<double> recompute_residual(const json& record) {
  if (!record.contains("witness") || !record.contains("context")) return std::nullopt;
  const auto w = detail::vectors_from_json(record["witness"]);
  const json& c = record["context"];
  const std::string kind = c.at("kind").get<std::string>();
  auto lam = [&] { return Lambda(c.at("lambda").get<double>()); };
  auto norm = [&](const char* key) { return norm_from_json(c.at(key)); };
  auto method = [&] {
    const std::string m = c.value("method", "auto");
    return m == "numerical" ? DerivativeMethod::numerical
                            : (m == "exact" ? DerivativeMethod::exact : DerivativeMethod::automatic);
  };

  if (kind == "properties") return detail::property_slack(norm("norm"), lam(), w.at(0), w.at(1), method());
  if (kind == "inclusion") {
    const auto rel = Relation::parse(c.at("relation_b").get<std::string>());
    return check(rel, norm("norm"), w.at(0), w.at(1), c.at("tol").get<double>(), method()).normalized();
  }
  if (kind == "symmetry") return detail::symmetry_gap(norm("norm"), lam(), w.at(0), w.at(1));
  if (kind == "quartic") return detail::relative_quartic(norm("norm"), lam(), w.at(0), w.at(1));
  if (kind == "uc") {
    const NormSpec n = norm("norm");
    return rho_pair(n, w.at(0), w.at(1)).rho_lambda(lam()) - c.at("bound").get<double>();
  }
  if (kind == "preserve") {
    const auto t = map_from_json(c.at("map"));
    return detail::preserve_residual(t, lam(), w.at(0), w.at(1));
  }
  if (kind == "similarity") {
    const auto t = map_from_json(c.at("map"));
    const double hi = eval_norm(t.codomain(), t(w.at(0))) / eval_norm(t.domain(), w.at(0));
    const double lo = eval_norm(t.codomain(), t(w.at(1))) / eval_norm(t.domain(), w.at(1));
    return (hi - lo) / hi;
  }
  if (kind == "scaling") {
    const auto t = map_from_json(c.at("map"));
    const double n2 = std::pow(c.at("op_norm").get<double>(), 2);
    const Vector& x = w.at(0);
    const Vector& y = w.at(1);
    return std::abs(rho_pair(t.codomain(), t(x), t(y)).rho_lambda(lam()) -
                    n2 * rho_pair(t.domain(), x, y).rho_lambda(lam())) /
           (n2 * detail::norm_product(t.domain(), x, y));
  }
  if (kind == "ratio") {
    return std::abs(detail::ratio_of(norm("norm1"), norm("norm2"), lam(), w.at(0), w.at(1)) -
                    c.at("target").get<double>());
  }
  if (kind == "ratio_break") return detail::break_residual(norm("norm2"), lam(), w.at(0), w.at(1));
  if (kind == "ratio_spread") {
    const NormSpec n1 = norm("norm1"), n2 = norm("norm2");
    return detail::ratio_of(n1, n2, lam(), w.at(2), w.at(3)) /
           detail::ratio_of(n1, n2, lam(), w.at(0), w.at(1));
  }
  if (kind == "example") {
    const auto p = rho_pair(NormSpec::max_norm(2), w.at(0), w.at(1), method());
    const auto& e = c.at("expected");
    return std::max({std::abs(p.rho_minus - e.at(0).get<double>()),
                     std::abs(p.rho_plus - e.at(1).get<double>()),
                     std::abs(p.rho_mid() - e.at(2).get<double>()),
                     std::abs(p.rho_lambda(lam()) - e.at(3).get<double>())});
  }
  throw Error(ErrorCode::invalid_argument, "unknown record kind '" + kind + "'");
}

namespace detail {

using Task = std::function<std::vector<CheckRecord>()>;

struct TaskBuilder {
  const SuiteConfig& cfg;
  std::vector<Task> tasks;

  std::uint64_t seed_for(const std::string& id) const { return split_seed(cfg.seed, stable_hash(id)); }

  json method_json() const {
    switch (cfg.method) {
      case DerivativeMethod::exact: return "exact";
      case DerivativeMethod::numerical: return "numerical";
      default: return "auto";
    }
  }

  static CheckRecord make(std::string id, Suite s) {
    CheckRecord r;
    r.check_id = std::move(id);
    r.suite = s;
    return r;
  }

  void properties(const NormSpec& n, double lv) {
    tasks.push_back([this, n, lv] {
      const Lambda l(lv);
      auto r = make("properties/" + n.label() + "/" + lambda_tag(lv), Suite::properties);
      r.context = {{"kind", "properties"}, {"norm", norm_to_json(n)}, {"lambda", lv},
                   {"method", method_json()}};
      const std::uint64_t seed = seed_for(r.check_id);
      const auto structured = structured_points(n);
      double worst = std::numeric_limits<double>::infinity();
      std::size_t unconverged = 0;
      std::vector<Vector> worst_pair, first_unconverged;
      for (std::size_t k = 0; k < cfg.trials; ++k) {
        Rng rng(split_seed(seed, k));
        Vector x = (k % 2 == 0 && !structured.empty()) ? structured[rng.index(structured.size())]
                                                       : rng.gaussian(n.dim());
        x = rng.log_uniform_scale() * x;
        const Vector y = rng.log_uniform_scale() * rng.gaussian(n.dim());
        bool conv = true;
        const double s = property_slack(n, l, x, y, cfg.method, &conv);
        if (!conv && unconverged++ == 0) first_unconverged = {x, y};
        if (s < worst) {
          worst = s;
          worst_pair = {x, y};
        }
      }
      r.residual = worst;
      r.detail = std::to_string(cfg.trials) + " pairs";
      if (worst < -1e-9) {
        r.status = CheckStatus::fail;
        r.witness = worst_pair;
      } else if (unconverged > 0) {
        r.status = CheckStatus::numerical_failure;
        r.witness = first_unconverged;
        r.residual = property_slack(n, l, first_unconverged[0], first_unconverged[1], cfg.method);
        r.detail += ", " + std::to_string(unconverged) + " enclosures above tolerance";
      }
      return std::vector<CheckRecord>{r};
    });
  }

  // A witness is expected iff expect_witness; anything else is a fail.
  void inclusion(Suite suite, const std::string& prefix, const Relation& a, const Relation& b,
                 const NormSpec& n, bool expect_witness, std::optional<double> lv) {
    tasks.push_back([this, suite, prefix, a, b, n, expect_witness, lv] {
      std::string id = prefix + "/" + n.label() + "/" + a.name() + " in " + b.name();
      if (lv) id += "/" + lambda_tag(*lv);
      auto r = make(id, suite);
      r.context = {{"kind", "inclusion"}, {"norm", norm_to_json(n)}, {"relation_a", a.name()},
                   {"relation_b", b.name()}, {"tol", cfg.tol}, {"method", method_json()}};
      const std::uint64_t seed = seed_for(r.check_id);
      std::optional<std::array<Vector, 2>> witness;
      double residual = 0.0;
      std::size_t tested = 0;
      bool starved = false;
      if (expect_witness) {
        const auto s = search_counterexample(a, b, n, std::min<std::size_t>(cfg.trials, 1000), seed,
                                             cfg.tol, cfg.method);
        witness = s.witness;
        residual = s.in_b.normalized();
        tested = s.probes;
      } else {
        ProbeOptions opt;
        opt.trials = cfg.trials;
        opt.seed = seed;
        opt.tol = cfg.tol;
        opt.method = cfg.method;
        const auto p = inclusion_probe(a, b, n, opt);
        witness = p.witness;
        residual = p.in_b.normalized();
        tested = p.trials;
        starved = p.status == ProbeResult::Status::starvation;
      }
      r.residual = residual;
      if (witness) r.witness = {(*witness)[0], (*witness)[1]};
      r.detail = std::to_string(tested) + " pairs, " +
                 (witness ? "witness " + format_vector((*witness)[0]) + " " +
                                format_vector((*witness)[1])
                          : std::string("no witness")) +
                 (expect_witness ? " (witness predicted)" : " (inclusion predicted)");
      if (starved && !witness) {
        r.status = CheckStatus::vacuous;
        r.detail += ", pair generation starved";
      } else {
        r.status = (witness.has_value() == expect_witness) ? CheckStatus::pass : CheckStatus::fail;
      }
      return std::vector<CheckRecord>{r};
    });
  }

  void endpoint(Suite suite, const std::string& prefix, const Relation& a, const Relation& b,
                const NormSpec& n, double lv) {
    auto r = make(prefix + "/" + n.label() + "/" + a.name() + " in " + b.name() + "/" +
                      lambda_tag(lv),
                  suite);
    r.status = CheckStatus::vacuous;
    r.detail = "lambda outside the range of the characterization";
    tasks.push_back([r] { return std::vector<CheckRecord>{r}; });
  }

  void smoothness(const NormSpec& n) {
    const bool smooth = n.is_smooth();
    const std::string pre = "smoothness";
    using R = Relation;
    // lambda-free characterizations of smoothness
    const std::vector<std::pair<R, R>> fixed{
        {R::rho_minus(), R::rho_plus()}, {R::rho_plus(), R::rho_minus()},
        {R::rho_mid(), R::rho_minus()},  {R::rho_minus(), R::rho_mid()},
        {R::rho_mid(), R::rho_plus()},   {R::rho_plus(), R::rho_mid()},
        {R::rho_star(), R::rho_minus()}, {R::rho_star(), R::rho_plus()},
        {R::rho_star(), R::rho_mid()},   {R::rho_mid(), R::rho_star()},
        {R::birkhoff(), R::rho_star()}};
    for (const auto& [a, b] : fixed) inclusion(Suite::smoothness, pre, a, b, n, !smooth, std::nullopt);
    for (double lv : cfg.lambdas) {
      const R rl = R::rho_lambda(Lambda(lv));
      inclusion(Suite::smoothness, pre, R::birkhoff(), rl, n, !smooth, std::nullopt);
      const std::vector<std::pair<R, bool>> partners{
          {R::rho_mid(), lv != 0.5}, {R::rho_plus(), lv > 0.0}, {R::rho_minus(), lv < 1.0}};
      for (const auto& [p, in_range] : partners) {
        for (const auto& [a, b] : {std::pair{p, rl}, std::pair{rl, p}}) {
          if (in_range)
            inclusion(Suite::smoothness, pre, a, b, n, !smooth, std::nullopt);
          else
            endpoint(Suite::smoothness, pre, a, b, n, lv);
        }
      }
    }
  }

  void characterization(const NormSpec& n, double lv) {
    tasks.push_back([this, n, lv] {
      const Lambda l(lv);
      std::vector<CheckRecord> out;
      const bool ip = n.is_inner_product();

      auto sym = make("characterization/" + n.label() + "/symmetry/" + lambda_tag(lv),
                      Suite::characterization);
      sym.context = {{"kind", "symmetry"}, {"norm", norm_to_json(n)}, {"lambda", lv}};
      const auto d = symmetry_defect(n, l, cfg.trials, seed_for(sym.check_id));
      sym.residual = symmetry_gap(n, l, d.x, d.y);
      sym.witness = {d.x, d.y};
      if (ip) {
        sym.status = sym.residual <= 1e-8 ? CheckStatus::pass : CheckStatus::fail;
        sym.detail = "inner-product norm, symmetry predicted";
      } else {
        sym.status = sym.residual > 1e-6 ? CheckStatus::pass : CheckStatus::fail;
        sym.detail = "asymmetric pair predicted";
        if (sym.status == CheckStatus::fail) sym.witness.clear();
      }
      out.push_back(sym);

      auto q = make("characterization/" + n.label() + "/quartic/" + lambda_tag(lv),
                    Suite::characterization);
      q.context = {{"kind", "quartic"}, {"norm", norm_to_json(n)}, {"lambda", lv}};
      const std::uint64_t seed = seed_for(q.check_id);
      const auto structured = structured_points(n);
      double worst = -1.0;
      std::vector<Vector> pair;
      for (std::size_t k = 0; k < cfg.trials; ++k) {
        Rng rng(split_seed(seed, k));
        Vector x = (k % 2 == 0 && !structured.empty()) ? structured[rng.index(structured.size())]
                                                       : rng.gaussian(n.dim());
        x = rng.log_uniform_scale(1.0) * x;
        const Vector y = (k % 3 == 0 && !structured.empty())
                             ? structured[rng.index(structured.size())]
                             : rng.log_uniform_scale(1.0) * rng.gaussian(n.dim());
        const double v = relative_quartic(n, l, x, y);
        if (v > worst) {
          worst = v;
          pair = {x, y};
        }
      }
      q.residual = worst;
      q.witness = pair;
      if (ip) {
        q.status = worst <= 1e-6 ? CheckStatus::pass : CheckStatus::fail;
        q.detail = "identity predicted";
      } else if (!n.is_smooth()) {
        q.status = worst > 1e-6 ? CheckStatus::pass : CheckStatus::fail;
        q.detail = "nonsmooth norm, identity must fail somewhere";
        if (q.status == CheckStatus::fail) q.witness.clear();
      } else {
        q.status = CheckStatus::vacuous;
        q.detail = "smooth non-inner-product norm, no prediction";
      }
      out.push_back(q);
      return out;
    });
  }

  void uniform_convexity(const NormSpec& n) {
    tasks.push_back([this, n] {
      std::vector<CheckRecord> out;
      const std::string base = "uniform_convexity/" + n.label();
      ModulusOptions mopt;
      mopt.seed = seed_for(base + "/modulus");
      const double delta = convexity_modulus(n, cfg.epsilon, mopt).delta_hat;
      for (double lv : cfg.lambdas) {
        auto r = make(base + "/" + lambda_tag(lv), Suite::uniform_convexity);
        const auto u = uc_rho_bound_check_from(n, Lambda(lv), cfg.epsilon, delta, cfg.trials,
                                               seed_for(r.check_id));
        r.context = {{"kind", "uc"}, {"norm", norm_to_json(n)}, {"lambda", lv}, {"bound", u.bound}};
        r.residual = u.max_value - u.bound;
        r.detail = "xi=" + format_decimal(u.xi_hat) + ", bound=" + format_decimal(u.bound) +
                   ", max rho_l=" + format_decimal(u.max_value);
        switch (u.status) {
          case UcCheckResult::Status::pass: r.status = CheckStatus::pass; break;
          case UcCheckResult::Status::vacuous: r.status = CheckStatus::vacuous; break;
          case UcCheckResult::Status::witness:
            r.status = CheckStatus::fail;
            r.witness = {u.witness->first, u.witness->second};
            r.residual = rho_pair(n, r.witness[0], r.witness[1]).rho_lambda(Lambda(lv)) - u.bound;
            break;
        }
        out.push_back(r);
      }
      return out;
    });
  }

  void map_fixture(const fixtures::MapFixture& f) {
    tasks.push_back([this, f] {
      std::vector<CheckRecord> out;
      const std::string base = "mappings/" + f.name;
      const json mj = map_to_json(f.map);
      SearchOptions sopt;
      sopt.seed = seed_for(base + "/search");

      auto sim = make(base + "/similarity", Suite::mappings);
      const auto s = similarity_defect(f.map, sopt);
      sim.context = {{"kind", "similarity"}, {"map", mj}};
      sim.witness = {s.x_max, s.x_min};
      sim.residual = s.ratio_max > 0 ? s.defect() / s.ratio_max : 0.0;
      const bool sim_ok = s.is_similarity();
      sim.detail = "ratio_max=" + format_decimal(s.ratio_max) + ", ratio_min=" + format_decimal(s.ratio_min);
      if (s.degenerate) {
        sim.status = CheckStatus::degenerate;
      } else {
        sim.status = sim_ok == f.similarity ? CheckStatus::pass : CheckStatus::fail;
      }
      out.push_back(sim);

      const auto onorm = operator_norm(f.map, sopt);
      for (double lv : cfg.lambdas) {
        const Lambda l(lv);
        auto pr = make(base + "/preserve/" + lambda_tag(lv), Suite::mappings);
        pr.context = {{"kind", "preserve"}, {"map", mj}, {"lambda", lv}};
        const auto p = preserves_rho_lambda(f.map, l, cfg.trials, seed_for(pr.check_id), cfg.tol);
        bool preserves = p.status == PreservationResult::Status::pass;
        if (p.witness) {
          pr.witness = {p.witness->first, p.witness->second};
          pr.residual = preserve_residual(f.map, l, pr.witness[0], pr.witness[1]);
        }
        if (p.status == PreservationResult::Status::degenerate) pr.status = CheckStatus::degenerate;
        else if (p.status == PreservationResult::Status::starvation) pr.status = CheckStatus::vacuous;
        else pr.status = preserves == f.similarity ? CheckStatus::pass : CheckStatus::fail;
        pr.detail = std::string("status ") + to_string(p.status);
        out.push_back(pr);

        auto sc = make(base + "/scaling/" + lambda_tag(lv), Suite::mappings);
        const auto sr = scaling_identity_residual(f.map, l, cfg.trials, seed_for(sc.check_id), sopt);
        sc.context = {{"kind", "scaling"}, {"map", mj}, {"lambda", lv}, {"op_norm", onorm.value}};
        const bool scales = sr.max_residual <= 1e-6;
        if (sr.witness) {
          sc.witness = {sr.witness->first, sr.witness->second};
          sc.residual = sr.max_residual;
        }
        sc.detail = "operator norm " + format_decimal(sr.op_norm);
        if (sr.degenerate) sc.status = CheckStatus::degenerate;
        else sc.status = scales == f.similarity ? CheckStatus::pass : CheckStatus::fail;
        out.push_back(sc);

        // the three conditions must agree whatever the fixture label says
        auto eq = make(base + "/agreement/" + lambda_tag(lv), Suite::mappings);
        const bool agree = (sim_ok == preserves) && (preserves == scales);
        eq.status = agree ? CheckStatus::pass : CheckStatus::fail;
        eq.detail = std::string("similarity=") + (sim_ok ? "yes" : "no") +
                    ", preserves=" + (preserves ? "yes" : "no") + ", scaling=" + (scales ? "yes" : "no");
        if (!agree) {
          // the condition that failed carries the witness
          eq.context = sim_ok ? (preserves ? sc.context : pr.context) : sim.context;
          eq.witness = sim_ok ? (preserves ? sc.witness : pr.witness) : sim.witness;
          eq.residual = sim_ok ? (preserves ? sc.residual : pr.residual) : sim.residual;
        }
        out.push_back(eq);
      }
      return out;
    });
  }

  void doubled_ratio(const NormSpec& n, double lv) {
    tasks.push_back([this, n, lv] {
      const Lambda l(lv);
      const NormSpec doubled = NormSpec::linear_image(2.0 * Matrix::identity(n.dim()), n);
      auto r = make("mappings/ratio/" + n.label() + "/doubled/" + lambda_tag(lv), Suite::mappings);
      r.context = {{"kind", "ratio"}, {"norm1", norm_to_json(n)}, {"norm2", norm_to_json(doubled)},
                   {"lambda", lv}, {"target", 4.0}};
      const auto rr = two_norm_rho_ratio(n, doubled, l, cfg.trials, seed_for(r.check_id), 1e-3, cfg.tol);
      r.detail = "m=" + format_decimal(rr.m_hat) + ", M=" + format_decimal(rr.M_hat) + ", " +
                 std::to_string(rr.pairs_used) + " pairs";
      if (rr.pairs_used == 0) {
        r.status = CheckStatus::vacuous;
      } else {
        const bool lo_worse = std::abs(rr.m_hat - 4.0) > std::abs(rr.M_hat - 4.0);
        const auto& p = lo_worse ? *rr.min_pair : *rr.max_pair;
        r.witness = {p.first, p.second};
        r.residual = std::abs(ratio_of(n, doubled, l, p.first, p.second) - 4.0);
        r.status = (r.residual <= 1e-9 * 4.0 && !rr.breaking) ? CheckStatus::pass : CheckStatus::fail;
      }
      return std::vector<CheckRecord>{r};
    });
  }

  void euclid_vs_max(double lv) {
    tasks.push_back([this, lv] {
      const Lambda l(lv);
      const NormSpec n1 = NormSpec::lp(2, 2), n2 = NormSpec::max_norm(2);
      auto r = make("mappings/ratio/l2 vs linf[d=2]/" + lambda_tag(lv), Suite::mappings);
      const auto rr = two_norm_rho_ratio(n1, n2, l, cfg.trials, seed_for(r.check_id), 1e-3, cfg.tol);
      r.detail = "spread=" + format_decimal(rr.spread());
      if (rr.breaking) {
        r.context = {{"kind", "ratio_break"}, {"norm1", norm_to_json(n1)},
                     {"norm2", norm_to_json(n2)}, {"lambda", lv}};
        r.witness = {rr.breaking->first, rr.breaking->second};
        r.residual = break_residual(n2, l, r.witness[0], r.witness[1]);
        r.status = CheckStatus::pass;
        r.detail += ", orthogonality-breaking pair found";
      } else if (rr.pairs_used > 0 && rr.spread() > 1.5) {
        r.context = {{"kind", "ratio_spread"}, {"norm1", norm_to_json(n1)},
                     {"norm2", norm_to_json(n2)}, {"lambda", lv}};
        r.witness = {rr.min_pair->first, rr.min_pair->second, rr.max_pair->first, rr.max_pair->second};
        r.residual = rr.spread();
        r.status = CheckStatus::pass;
      } else {
        r.status = CheckStatus::fail;
        r.detail += ", the norms look isometric";
      }
      return std::vector<CheckRecord>{r};
    });
  }

  void examples(double lv) {
    tasks.push_back([this, lv] {
      std::vector<CheckRecord> out;
      for (const auto& row : reference_examples(Lambda(lv), cfg.method)) {
        auto r = make("examples/" + row.id + "/" + lambda_tag(lv), Suite::examples);
        if (!row.defined) {
          r.status = CheckStatus::vacuous;
          r.detail = row.note;
          out.push_back(r);
          continue;
        }
        r.context = {{"kind", "example"},
                     {"lambda", lv},
                     {"method", method_json()},
                     {"expected",
                      {row.expected_minus, row.expected_plus, row.expected_mid, row.expected_lambda}}};
        r.witness = {row.x, row.y};
        r.residual = row.max_error();
        const double allowed = cfg.method == DerivativeMethod::numerical ? 1e-6 : 1e-12;
        bool flags_ok = true;
        if (row.id == "vertex") flags_ok = row.birkhoff && (row.rho_lambda_orthogonal == (lv == 0.0));
        if (row.id == "lambda_pair") flags_ok = row.rho_lambda_orthogonal && row.birkhoff;
        r.status = (r.residual <= allowed && flags_ok) ? CheckStatus::pass : CheckStatus::fail;
        r.detail = "rho-=" + format_scalar(row.computed.rho_minus) +
                   ", rho+=" + format_scalar(row.computed.rho_plus) +
                   ", rho=" + format_scalar(row.computed.rho_mid()) +
                   ", rho_l=" + format_scalar(row.computed.rho_lambda(Lambda(lv))) +
                   ", B=" + (row.birkhoff ? "true" : "false") +
                   ", rho_l-orth=" + (row.rho_lambda_orthogonal ? "true" : "false");
        out.push_back(r);
      }
      return out;
    });
  }
};

inline std::vector<CheckRecord> run_tasks(const std::vector<Task>& tasks, std::size_t threads) {
  std::vector<std::vector<CheckRecord>> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto t0 = std::chrono::steady_clock::now();
      slots[i] = tasks[i]();
      const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      for (auto& r : slots[i]) r.runtime_ms = ms / static_cast<double>(slots[i].size());
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, tasks.size()));
  std::vector<std::jthread> pool;
  for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  pool.clear();
  std::vector<CheckRecord> out;
  for (auto& s : slots)
    for (auto& r : s) out.push_back(std::move(r));
  return out;
}

}  // namespace detail

/// Runs the selected suites over norms x lambdas. Every check draws from its
/// own stream derived from the seed and the check id, so the records do not
/// depend on the number of threads.
inline SuiteReport run_suite(const SuiteConfig& cfg) {
  cfg.validate();
  detail::TaskBuilder b{cfg, {}};
  auto has = [&](Suite s) { return std::find(cfg.suites.begin(), cfg.suites.end(), s) != cfg.suites.end(); };
  for (Suite s : all_suites()) {
    if (!has(s)) continue;
    switch (s) {
      case Suite::properties:
        for (const auto& n : cfg.norms)
          for (double l : cfg.lambdas) b.properties(n, l);
        break;
      case Suite::inclusions:
        for (const auto& n : cfg.norms)
          for (double l : cfg.lambdas)
            b.inclusion(Suite::inclusions, "inclusions", Relation::rho_lambda(Lambda(l)),
                        Relation::birkhoff(), n, false, std::nullopt);
        break;
      case Suite::smoothness:
        for (const auto& n : cfg.norms) b.smoothness(n);
        break;
      case Suite::characterization:
        for (const auto& n : cfg.norms)
          for (double l : cfg.lambdas) b.characterization(n, l);
        break;
      case Suite::uniform_convexity:
        for (const auto& n : cfg.norms) b.uniform_convexity(n);
        break;
      case Suite::mappings:
        for (const auto& f : fixtures::maps()) b.map_fixture(f);
        for (const auto& n : cfg.norms)
          for (double l : cfg.lambdas) b.doubled_ratio(n, l);
        for (double l : cfg.lambdas) b.euclid_vs_max(l);
        break;
      case Suite::examples:
        for (double l : cfg.lambdas) b.examples(l);
        break;
    }
  }
  SuiteReport rep;
  rep.seed = cfg.seed;
  rep.records = detail::run_tasks(b.tasks, cfg.threads);
  return rep;
}

/// Canonical JSON form. With timing off the output is a pure function of the
/// config.
inline json report_to_json(const SuiteReport& rep, bool timing = true) {
  json j;
  j["seed"] = rep.seed;
  json recs = json::array();
  for (const auto& r : rep.records) {
    json o;
    o["check_id"] = r.check_id;
    o["suite"] = to_string(r.suite);
    o["status"] = to_string(r.status);
    o["residual"] = std::isfinite(r.residual) ? json(r.residual) : json(format_decimal(r.residual));
    if (!r.witness.empty()) o["witness"] = detail::vectors_to_json(r.witness);
    if (!r.context.empty()) o["context"] = r.context;
    if (!r.detail.empty()) o["detail"] = r.detail;
    if (timing) o["runtime_ms"] = r.runtime_ms;
    recs.push_back(std::move(o));
  }
  j["records"] = std::move(recs);
  json summary;
  for (const auto& [s, n] : rep.counts()) summary[to_string(s)] = n;
  summary["total"] = rep.records.size();
  summary["exit_code"] = rep.exit_code();
  j["summary"] = std::move(summary);
  return j;
}

/// Human table rendered from the canonical JSON.
inline std::string render_table(const json& report) {
  std::string out;
  for (const auto& r : report.at("records")) {
    std::string status = r.at("status").get<std::string>();
    status.resize(std::max<std::size_t>(status.size(), 18), ' ');
    out += status + r.at("check_id").get<std::string>();
    if (r.contains("detail")) out += "  [" + r.at("detail").get<std::string>() + "]";
    out += "\n";
  }
  const auto& s = report.at("summary");
  out += "total " + std::to_string(s.at("total").get<std::size_t>());
  for (const char* k : {"pass", "vacuous", "degenerate", "numerical_failure", "fail"})
    out += ", " + std::string(k) + " " + std::to_string(s.at(k).get<std::size_t>());
  return out + "\n";
}

}  // namespace rholab
