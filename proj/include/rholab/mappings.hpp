#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rholab/derivatives.hpp"
#include "rholab/error.hpp"
#include "rholab/norm.hpp"
#include "rholab/norm_json.hpp"
#include "rholab/orthogonality.hpp"
#include "rholab/random.hpp"
#include "rholab/vector.hpp"

namespace rholab {

/// T : (R^n, domain) -> (R^m, codomain) given by an m x n matrix.
class LinearMap {
 public:
  LinearMap(Matrix matrix, NormSpec domain, NormSpec codomain)
      : matrix_(std::move(matrix)), domain_(std::move(domain)), codomain_(std::move(codomain)) {
    if (matrix_.cols() != domain_.dim() || matrix_.rows() != codomain_.dim())
      throw Error(ErrorCode::dimension_mismatch,
                  "matrix is " + std::to_string(matrix_.rows()) + "x" +
                      std::to_string(matrix_.cols()) + " but the spaces have dimensions " +
                      std::to_string(domain_.dim()) + " -> " + std::to_string(codomain_.dim()));
  }

  /// Map of a space into itself.
  LinearMap(Matrix matrix, const NormSpec& space) : LinearMap(std::move(matrix), space, space) {}

  const Matrix& matrix() const noexcept { return matrix_; }
  const NormSpec& domain() const noexcept { return domain_; }
  const NormSpec& codomain() const noexcept { return codomain_; }

  Vector operator()(const Vector& x) const { return matrix_ * x; }
  bool is_injective() const { return rank(matrix_) == domain_.dim(); }
  bool is_zero() const {
    for (std::size_t r = 0; r < matrix_.rows(); ++r)
      if (!matrix_.row(r).is_zero()) return false;
    return true;
  }

 private:
  Matrix matrix_;
  NormSpec domain_;
  NormSpec codomain_;
};

inline json map_to_json(const LinearMap& t) {
  json j;
  j["matrix"] = detail::rows_to_json(t.matrix());
  j["domain"] = norm_to_json(t.domain());
  j["codomain"] = norm_to_json(t.codomain());
  return j;
}

/// {"matrix": [[...]], "domain": <norm>, "codomain": <norm>}; the codomain
/// defaults to the domain. Norm dimensions default to the matrix shape.
inline LinearMap map_from_json(const json& j) {
  if (!j.is_object()) detail::schema_error("", "map must be a JSON object");
  Matrix m;
  try {
    m = Matrix::from_rows(detail::rows_from_json(detail::field(j, "matrix", ""), "/matrix"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_error) throw;
    detail::schema_error("/matrix", e.what());
  }
  if (m.rows() == 0) detail::schema_error("/matrix", "matrix must be nonempty");
  NormSpec domain = norm_from_json(detail::field(j, "domain", ""), m.cols(), "/domain");
  NormSpec codomain =
      j.contains("codomain") ? norm_from_json(j["codomain"], m.rows(), "/codomain") : domain;
  try {
    return LinearMap(std::move(m), std::move(domain), std::move(codomain));
  } catch (const Error& e) {
    detail::schema_error("/matrix", e.what());
  }
}

struct OperatorNormEstimate {
  double value = 0.0;
  Vector witness;  // unit vector in the domain with ||T witness|| = value
  bool is_exact = false;
  bool zero_map = false;
};

struct SearchOptions {
  std::size_t starts = 64;
  std::size_t steps = 200;
  std::uint64_t seed = 42;
};

namespace detail {

// Multi-start local search for the extreme of ||T x|| over the unit sphere
// of the domain; sign = +1 maximizes, -1 minimizes.
inline std::pair<double, Vector> extreme_ratio(const LinearMap& t, double sign,
                                               const SearchOptions& opt) {
  const auto& dom = t.domain();
  const std::size_t n = dom.dim();
  auto value = [&](const Vector& u) { return eval_norm(t.codomain(), t(u)); };

  std::vector<Vector> seeds;
  for (std::size_t i = 0; i < n; ++i) seeds.push_back(Vector::basis(n, i));
  for (const auto& p : structured_points(dom)) seeds.push_back(p);

  double best = sign > 0 ? -1.0 : std::numeric_limits<double>::infinity();
  Vector best_x;
  auto better = [&](double a, double b) { return sign > 0 ? a > b : a < b; };
  for (const auto& s : seeds) {
    const Vector u = normalize(dom, s);
    const double v = value(u);
    if (better(v, best)) {
      best = v;
      best_x = u;
    }
  }
  for (std::size_t s = 0; s < opt.starts; ++s) {
    Rng rng(split_seed(opt.seed, s));
    Vector u = (s < seeds.size()) ? normalize(dom, seeds[s]) : normalize(dom, rng.gaussian(n));
    double cur = value(u);
    double step = 0.25;
    for (std::size_t k = 0; k < opt.steps && step > 1e-14; ++k) {
      const Vector cand = normalize(dom, axpy(u, step, rng.gaussian(n)));
      const double v = value(cand);
      if (better(v, cur)) {
        u = cand;
        cur = v;
        step *= 1.5;
      } else {
        step *= 0.7;
      }
    }
    if (better(cur, best)) {
      best = cur;
      best_x = u;
    }
  }
  return {best, best_x};
}

}  // namespace detail

/// ||T|| = sup ||T x|| over the domain unit sphere. Exact for an l_1 domain
/// (the largest image of a basis vector); otherwise the best value found
/// by multi-start local search, a lower bound.
inline OperatorNormEstimate operator_norm(const LinearMap& t, const SearchOptions& opt = {}) {
  OperatorNormEstimate out;
  const std::size_t n = t.domain().dim();
  if (t.is_zero()) {
    out.zero_map = true;
    out.is_exact = true;
    out.witness = normalize(t.domain(), Vector::basis(n, 0));
    return out;
  }
  const auto* lp = std::get_if<LpNorm>(&t.domain().variant());
  if (lp && lp->p.is_one()) {
    out.is_exact = true;
    out.value = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = eval_norm(t.codomain(), t.matrix().column(j));
      if (v > out.value) {
        out.value = v;
        out.witness = Vector::basis(n, j);
      }
    }
    return out;
  }
  auto [v, x] = detail::extreme_ratio(t, +1.0, opt);
  out.value = v;
  out.witness = std::move(x);
  return out;
}

/// Spread of ||T x|| over the domain unit sphere; a similarity has
/// ratio_max == ratio_min.
struct SimilarityReport {
  double ratio_max = 0.0;
  double ratio_min = 0.0;
  Vector x_max;
  Vector x_min;
  bool degenerate = false;  // some unit vector maps to 0

  double defect() const { return ratio_max - ratio_min; }
  bool is_similarity(double tol = 1e-6) const {
    return !degenerate && defect() <= tol * ratio_max;
  }
};

inline SimilarityReport similarity_defect(const LinearMap& t, const SearchOptions& opt = {}) {
  SimilarityReport out;
  auto [hi, xh] = detail::extreme_ratio(t, +1.0, opt);
  SearchOptions lo_opt = opt;
  lo_opt.seed = split_seed(opt.seed, 0x6c6f);
  auto [lo, xl] = detail::extreme_ratio(t, -1.0, lo_opt);
  out.ratio_max = hi;
  out.ratio_min = lo;
  out.x_max = std::move(xh);
  out.x_min = std::move(xl);
  out.degenerate = !t.is_injective() || lo == 0.0;
  return out;
}

struct PreservationResult {
  enum class Status { pass, witness, degenerate, starvation } status = Status::pass;
  std::size_t trials = 0;
  std::optional<std::pair<Vector, Vector>> witness;  // (x, z) with x ⊥ z in the domain
  double residual = 0.0;  // |rho_l(Tx, Tz)| / (||Tx|| ||Tz||) at the witness
};

inline const char* to_string(PreservationResult::Status s) {
  switch (s) {
    case PreservationResult::Status::pass: return "pass";
    case PreservationResult::Status::witness: return "witness";
    case PreservationResult::Status::degenerate: return "degenerate";
    case PreservationResult::Status::starvation: return "starvation";
  }
  return "unknown";
}

namespace detail {

// x from the structured set on even draws, Gaussian otherwise; y Gaussian
// or structured.
inline std::pair<Vector, Vector> structured_or_random_pair(const std::vector<Vector>& structured,
                                                           std::size_t dim, std::size_t k,
                                                           Rng& rng) {
  const bool sx = k % 2 == 0 && !structured.empty();
  const bool sy = k % 3 == 0 && !structured.empty();
  Vector x = sx ? structured[rng.index(structured.size())] : rng.gaussian(dim);
  Vector y = sy ? structured[rng.index(structured.size())] : rng.gaussian(dim);
  return {std::move(x), std::move(y)};
}

}  // namespace detail

/// Builds rho_l-orthogonal pairs x ⊥ z in the domain and checks that
/// rho_l(Tx, Tz) vanishes within tol ||Tx|| ||Tz||.
inline PreservationResult preserves_rho_lambda(const LinearMap& t, Lambda l, std::size_t trials,
                                               std::uint64_t seed, double tol = 1e-8) {
  if (trials == 0) throw Error(ErrorCode::invalid_argument, "trials must be >= 1");
  PreservationResult out;
  if (!t.is_injective()) {
    out.status = PreservationResult::Status::degenerate;
    return out;
  }
  const auto& dom = t.domain();
  const auto structured = structured_points(dom);
  const std::size_t max_attempts = 100 * trials;
  for (std::size_t k = 0; out.trials < trials; ++k) {
    if (k >= max_attempts) {
      out.status = PreservationResult::Status::starvation;
      return out;
    }
    Rng rng(split_seed(seed, k));
    auto [x, y] = detail::structured_or_random_pair(structured, dom.dim(), k, rng);
    const auto o = rho_lambda_orthogonalize(dom, l, x, y, tol / 10.0);
    if (!o.verified || o.z.is_zero()) continue;
    ++out.trials;
    const Vector tx = t(x), tz = t(o.z);
    const double scale = eval_norm(t.codomain(), tx) * eval_norm(t.codomain(), tz);
    const double r = rho_pair(t.codomain(), tx, tz).rho_lambda(l);
    if (std::abs(r) > tol * scale) {
      out.status = PreservationResult::Status::witness;
      out.witness = std::make_pair(x, o.z);
      out.residual = std::abs(r) / scale;
      return out;
    }
  }
  return out;
}

struct ScalingReport {
  double max_residual = 0.0;
  double op_norm = 0.0;
  std::optional<std::pair<Vector, Vector>> witness;
  bool degenerate = false;
};

/// max |rho_l(Tx, Ty) - ||T||^2 rho_l(x, y)| / (||T||^2 ||x|| ||y||) over
/// sampled pairs, with ||T|| from operator_norm.
inline ScalingReport scaling_identity_residual(const LinearMap& t, Lambda l, std::size_t trials,
                                               std::uint64_t seed, const SearchOptions& opt = {}) {
  if (trials == 0) throw Error(ErrorCode::invalid_argument, "trials must be >= 1");
  ScalingReport out;
  const auto norm = operator_norm(t, opt);
  out.op_norm = norm.value;
  if (norm.zero_map || !t.is_injective()) {
    out.degenerate = true;
    return out;
  }
  const double n2 = norm.value * norm.value;
  const auto& dom = t.domain();
  const auto structured = structured_points(dom);
  for (std::size_t k = 0; k < trials; ++k) {
    Rng rng(split_seed(seed, k));
    auto [x, y] = detail::structured_or_random_pair(structured, dom.dim(), k, rng);
    const double scale = n2 * eval_norm(dom, x) * eval_norm(dom, y);
    const double r = std::abs(rho_pair(t.codomain(), t(x), t(y)).rho_lambda(l) -
                              n2 * rho_pair(dom, x, y).rho_lambda(l)) /
                     scale;
    if (r > out.max_residual) {
      out.max_residual = r;
      out.witness = std::make_pair(x, y);
    }
  }
  return out;
}

/// Extremes of |rho_l,2(x,y)| / |rho_l,1(x,y)| over sampled pairs with
/// |rho_l,1| above threshold ||x||_1 ||y||_1, and the first pair that is
/// rho_l-orthogonal in the first norm but not in the second.
struct RatioReport {
  double m_hat = std::numeric_limits<double>::infinity();
  double M_hat = 0.0;
  std::optional<std::pair<Vector, Vector>> min_pair;
  std::optional<std::pair<Vector, Vector>> max_pair;
  std::optional<std::pair<Vector, Vector>> breaking;
  double breaking_residual = 0.0;
  std::size_t pairs_used = 0;

  double spread() const { return m_hat > 0.0 ? M_hat / m_hat : std::numeric_limits<double>::infinity(); }
};

inline RatioReport two_norm_rho_ratio(const NormSpec& n1, const NormSpec& n2, Lambda l,
                                      std::size_t trials, std::uint64_t seed,
                                      double threshold = 1e-3, double tol = 1e-8) {
  if (n1.dim() != n2.dim())
    throw Error(ErrorCode::dimension_mismatch, "the two norms act on different dimensions");
  if (trials == 0) throw Error(ErrorCode::invalid_argument, "trials must be >= 1");
  RatioReport out;
  const auto structured = structured_points(n1);
  for (std::size_t k = 0; k < trials; ++k) {
    Rng rng(split_seed(seed, k));
    auto [x, y] = detail::structured_or_random_pair(structured, n1.dim(), k, rng);
    const double r1 = rho_pair(n1, x, y).rho_lambda(l);
    if (std::abs(r1) > threshold * eval_norm(n1, x) * eval_norm(n1, y)) {
      const double ratio = std::abs(rho_pair(n2, x, y).rho_lambda(l)) / std::abs(r1);
      ++out.pairs_used;
      if (ratio < out.m_hat) {
        out.m_hat = ratio;
        out.min_pair = std::make_pair(x, y);
      }
      if (ratio > out.M_hat) {
        out.M_hat = ratio;
        out.max_pair = std::make_pair(x, y);
      }
    }
    if (!out.breaking) {
      const auto o = rho_lambda_orthogonalize(n1, l, x, y, tol / 10.0);
      if (o.verified && !o.z.is_zero()) {
        const double r2 = rho_pair(n2, x, o.z).rho_lambda(l);
        const double scale = eval_norm(n2, x) * eval_norm(n2, o.z);
        if (std::abs(r2) > tol * scale) {
          out.breaking = std::make_pair(x, o.z);
          out.breaking_residual = std::abs(r2) / scale;
        }
      }
    }
  }
  return out;
}

}  // namespace rholab
