#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rholab/derivatives.hpp"
#include "rholab/norm.hpp"
#include "rholab/orthogonality.hpp"
#include "rholab/rational.hpp"

namespace rholab {

/// One reproduced pair in the plane with the max norm. Expected values come
/// from closed-form formulas in lambda; computed values from rho_pair.
struct ExampleRow {
  std::string id;
  Vector x;
  Vector y;
  double lambda = 0.0;
  bool defined = true;
  std::string note;

  double expected_minus = 0.0;
  double expected_plus = 0.0;
  double expected_mid = 0.0;
  double expected_lambda = 0.0;

  DerivativePair computed;
  bool birkhoff = false;
  bool rho_lambda_orthogonal = false;

  double max_error() const {
    if (!defined) return 0.0;
    const double m = 0.5 * (computed.rho_minus + computed.rho_plus);
    return std::max({std::abs(computed.rho_minus - expected_minus),
                     std::abs(computed.rho_plus - expected_plus), std::abs(m - expected_mid),
                     std::abs(computed.rho_lambda(Lambda(lambda)) - expected_lambda)});
  }
};

/// Rows: the vertex pair x = (1,1), y = (0,-1); the lambda-dependent pair
/// y = (-1/(2l), 1/(2(1-l))) against x = (1,1), undefined at l = 0 and 1;
/// and z = (1,1) against w = (0,1), u = (0,-1), v = (1,-1).
inline std::vector<ExampleRow> reference_examples(Lambda lambda,
                                                  DerivativeMethod method = DerivativeMethod::automatic) {
  const NormSpec n = NormSpec::max_norm(2);
  const double l = lambda.value();
  std::vector<ExampleRow> rows;

  auto finish = [&](ExampleRow r) {
    r.lambda = l;
    if (r.defined) {
      r.computed = rho_pair(n, r.x, r.y, method);
      r.birkhoff = check(Relation::birkhoff(), n, r.x, r.y, 1e-12, method).orthogonal;
      r.rho_lambda_orthogonal =
          check(Relation::rho_lambda(lambda), n, r.x, r.y, 1e-12, method).orthogonal;
    }
    rows.push_back(std::move(r));
  };

  ExampleRow vertex;
  vertex.id = "vertex";
  vertex.x = Vector{1, 1};
  vertex.y = Vector{0, -1};
  vertex.expected_minus = -1.0;
  vertex.expected_plus = 0.0;
  vertex.expected_mid = -0.5;
  vertex.expected_lambda = -l;
  finish(vertex);

  ExampleRow pair;
  pair.id = "lambda_pair";
  pair.x = Vector{1, 1};
  if (l > 0.0 && l < 1.0) {
    pair.y = Vector{-1.0 / (2.0 * l), 1.0 / (2.0 * (1.0 - l))};
    pair.expected_minus = -1.0 / (2.0 * l);
    pair.expected_plus = 1.0 / (2.0 * (1.0 - l));
    pair.expected_mid = (2.0 * l - 1.0) / (4.0 * l * (1.0 - l));
    pair.expected_lambda = 0.0;
  } else {
    pair.defined = false;
    pair.note = "undefined for this lambda (needs 0 < lambda < 1)";
  }
  finish(pair);

  ExampleRow zw;
  zw.id = "z_w";
  zw.x = Vector{1, 1};
  zw.y = Vector{0, 1};
  zw.expected_minus = 0.0;
  zw.expected_plus = 1.0;
  zw.expected_mid = 0.5;
  zw.expected_lambda = 1.0 - l;
  finish(zw);

  ExampleRow zu;
  zu.id = "z_u";
  zu.x = Vector{1, 1};
  zu.y = Vector{0, -1};
  zu.expected_minus = -1.0;
  zu.expected_plus = 0.0;
  zu.expected_mid = -0.5;
  zu.expected_lambda = -l;
  finish(zu);

  ExampleRow zv;
  zv.id = "z_v";
  zv.x = Vector{1, 1};
  zv.y = Vector{1, -1};
  zv.expected_minus = -1.0;
  zv.expected_plus = 1.0;
  zv.expected_mid = 0.0;
  zv.expected_lambda = 1.0 - 2.0 * l;
  finish(zv);

  return rows;
}

/// Plain-text table of the rows, values rendered as exact rationals where
/// they are small rationals.
inline std::string format_examples(const std::vector<ExampleRow>& rows) {
  using Cells = std::vector<std::string>;
  std::vector<Cells> table{{"id", "x", "y", "rho-", "rho+", "rho", "rho_l", "B", "rho_l-orth"}};
  std::vector<std::string> notes(1);
  for (const auto& r : rows) {
    Cells c{r.id, format_vector(r.x)};
    if (r.defined)
      c.insert(c.end(), {format_vector(r.y), format_scalar(r.computed.rho_minus),
                         format_scalar(r.computed.rho_plus), format_scalar(r.computed.rho_mid()),
                         format_scalar(r.computed.rho_lambda(Lambda(r.lambda))),
                         r.birkhoff ? "true" : "false", r.rho_lambda_orthogonal ? "true" : "false"});
    table.push_back(std::move(c));
    notes.push_back(r.defined ? "" : r.note);
  }
  std::vector<std::size_t> width(table.front().size(), 0);
  for (const auto& c : table)
    for (std::size_t i = 0; i < c.size(); ++i) width[i] = std::max(width[i], c[i].size());
  std::string out;
  for (std::size_t k = 0; k < table.size(); ++k) {
    std::string line;
    for (std::size_t i = 0; i < table[k].size(); ++i) {
      line += table[k][i];
      if (i + 1 < table[k].size() || !notes[k].empty()) line.append(width[i] - table[k][i].size() + 2, ' ');
    }
    out += line + notes[k] + "\n";
  }
  return out;
}

struct SearchResult {
  bool found = false;
  std::optional<std::array<Vector, 2>> witness;
  OrthResult in_a;
  OrthResult in_b;
  std::size_t probes = 0;      // candidate pairs in the zero set of relA that were tested
  bool structured_hit = false; // found in the deterministic structured phase

  /// The witness with coordinates as exact rationals where they round cleanly.
  std::string witness_text() const {
    if (!witness) return "exhausted";
    return "x = " + format_vector((*witness)[0]) + ", y = " + format_vector((*witness)[1]);
  }
};

/// Looks for x relA y with not x relB y. Structured pairs (ball vertices,
/// points with zero coordinates, polyhedral tie points) are tried first in a
/// fixed order, then the remaining budget goes to a randomized probe.
inline SearchResult search_counterexample(const Relation& rel_a, const Relation& rel_b,
                                          const NormSpec& spec, std::size_t budget,
                                          std::uint64_t seed, double tol = 1e-8,
                                          DerivativeMethod method = DerivativeMethod::automatic) {
  if (budget == 0) throw Error(ErrorCode::invalid_argument, "budget must be >= 1");
  SearchResult out;
  const double strict = tol / 10.0;
  const auto pts = structured_points(spec);

  auto try_pair = [&](const Vector& x, const Vector& y) {
    if (x.is_zero() || y.is_zero() || out.probes >= budget) return false;
    const OrthResult a = check(rel_a, spec, x, y, strict, method);
    if (!a.orthogonal) return false;
    ++out.probes;
    const OrthResult b = check(rel_b, spec, x, y, tol, method);
    if (b.orthogonal) return false;
    out.found = true;
    out.structured_hit = true;
    out.witness = std::array<Vector, 2>{x, y};
    out.in_a = a;
    out.in_b = b;
    return true;
  };

  // Round r pairs pts[i] with pts[i + r], so every structured x is tried
  // before any x gets a second partner.
  const std::size_t np = pts.size();
  for (std::size_t round = 0; round < np && out.probes < budget; ++round) {
    for (std::size_t i = 0; i < np && out.probes < budget; ++i) {
      const Vector& x = pts[i];
      const Vector& y = pts[(i + round) % np];
      switch (rel_a.kind()) {
        case Relation::Kind::birkhoff: {
          const auto iv = birkhoff_interval(spec, x, y, method);
          for (double t : {iv.lo, iv.hi, 0.5 * (iv.lo + iv.hi)})
            if (try_pair(x, axpy(y, t, x))) return out;
          break;
        }
        case Relation::Kind::isosceles: {
          const Vector u = normalize(spec, x), v = normalize(spec, y);
          if (try_pair(0.5 * (u + v), 0.5 * (u - v))) return out;
          break;
        }
        case Relation::Kind::rho_star:
          for (double side : {1.0, 0.0})
            if (try_pair(x, rho_lambda_orthogonalize(spec, Lambda(side), x, y, 1e-8, method).z))
              return out;
          break;
        default:
          if (try_pair(x, rho_lambda_orthogonalize(spec, *rel_a.linear_weight(), x, y, 1e-8, method).z))
            return out;
      }
    }
  }
  if (out.probes >= budget) return out;

  ProbeOptions opt;
  opt.trials = budget - out.probes;
  opt.seed = seed;
  opt.tol = tol;
  opt.method = method;
  const auto p = inclusion_probe(rel_a, rel_b, spec, opt);
  out.probes += p.trials;
  if (p.status == ProbeResult::Status::witness) {
    out.found = true;
    out.witness = p.witness;
    out.in_a = p.in_a;
    out.in_b = p.in_b;
  }
  return out;
}

}  // namespace rholab
