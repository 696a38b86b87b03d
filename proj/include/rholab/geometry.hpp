#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "rholab/derivatives.hpp"
#include "rholab/error.hpp"
#include "rholab/norm.hpp"
#include "rholab/random.hpp"
#include "rholab/vector.hpp"

namespace rholab {

namespace detail {

inline void require_nonzero(const Vector& v, const char* name) {
  if (v.is_zero())
    throw Error(ErrorCode::zero_vector, std::string(name) + " must be nonzero");
}

}  // namespace detail

/// ||x|| + ||y|| - (2 - ||x/||x|| + y/||y||||) min(||x||, ||y||) - ||x + y||,
/// nonnegative in every normed space.
inline double maligranda_gap(const NormSpec& spec, const Vector& x, const Vector& y) {
  require_dim(spec, x);
  require_dim(spec, y);
  detail::require_nonzero(x, "x");
  detail::require_nonzero(y, "y");
  const double nx = eval_norm(spec, x), ny = eval_norm(spec, y);
  const double unit_sum = eval_norm(spec, x / nx + y / ny);
  return nx + ny - (2.0 - unit_sum) * std::min(nx, ny) - eval_norm(spec, x + y);
}

/// Slacks of the two-sided bounds on rho_lambda, each oriented so that a
/// valid bound gives a nonnegative value.
struct BoundMargins {
  double v_lo = 0.0;    // rho_l - (||x|| - ||x - y||) ||x||
  double v_hi = 0.0;    // (||x + y|| - ||x||) ||x|| - rho_l
  double vi = 0.0;      // ||x|| ||y|| - |rho_l|
  double vii_lo = 0.0;  // rho_l - (1 - ||x^ - y^||) ||x|| ||y||
  double vii_hi = 0.0;  // (||x^ + y^|| - 1) ||x|| ||y|| - rho_l

  double min() const { return std::min({v_lo, v_hi, vi, vii_lo, vii_hi}); }
};

inline BoundMargins rho_bounds_margins(const NormSpec& spec, Lambda l, const Vector& x,
                                       const Vector& y,
                                       DerivativeMethod method = DerivativeMethod::automatic) {
  require_dim(spec, x);
  require_dim(spec, y);
  detail::require_nonzero(x, "x");
  detail::require_nonzero(y, "y");
  const double nx = eval_norm(spec, x), ny = eval_norm(spec, y);
  const double r = rho_pair(spec, x, y, method).rho_lambda(l);
  const Vector xu = x / nx, yu = y / ny;
  BoundMargins m;
  m.v_lo = r - (nx - eval_norm(spec, x - y)) * nx;
  m.v_hi = (eval_norm(spec, x + y) - nx) * nx - r;
  m.vi = nx * ny - std::abs(r);
  m.vii_lo = r - (1.0 - eval_norm(spec, xu - yu)) * nx * ny;
  m.vii_hi = (eval_norm(spec, xu + yu) - 1.0) * nx * ny - r;
  return m;
}

/// A defect value together with the pair that attains it.
struct DefectReport {
  double value = 0.0;
  Vector x;
  Vector y;
  std::optional<Lambda> lambda;
};

/// max |rho_l(x, y) - rho_l(y, x)| over unit-norm pairs: structured points
/// paired with random directions, random pairs, and any injected pairs.
/// Zero exactly for inner-product norms.
inline DefectReport symmetry_defect(const NormSpec& spec, Lambda l, std::size_t samples,
                                    std::uint64_t seed,
                                    const std::vector<std::pair<Vector, Vector>>& injected = {}) {
  if (samples == 0) throw Error(ErrorCode::invalid_argument, "samples must be >= 1");
  DefectReport best;
  best.lambda = l;
  best.value = -1.0;
  auto consider = [&](const Vector& a, const Vector& b) {
    if (a.is_zero() || b.is_zero()) return;
    const Vector x = normalize(spec, a), y = normalize(spec, b);
    const double d = std::abs(rho_pair(spec, x, y).rho_lambda(l) - rho_pair(spec, y, x).rho_lambda(l));
    if (d > best.value) {
      best.value = d;
      best.x = x;
      best.y = y;
    }
  };
  for (const auto& [a, b] : injected) {
    require_dim(spec, a);
    require_dim(spec, b);
    consider(a, b);
  }
  const auto structured = structured_points(spec);
  for (std::size_t k = 0; k < samples; ++k) {
    Rng rng(split_seed(seed, k));
    const Vector a = (k % 2 == 0 && !structured.empty())
                         ? structured[rng.index(structured.size())]
                         : rng.gaussian(spec.dim());
    consider(a, rng.gaussian(spec.dim()));
  }
  return best;
}

/// ||x+y||^4 - ||x-y||^4 - 8(||x||^2 rho_l(x,y) + ||y||^2 rho_l(y,x)); this
/// vanishes identically for inner-product norms.
inline double quartic_identity_defect(const NormSpec& spec, Lambda l, const Vector& x,
                                      const Vector& y,
                                      DerivativeMethod method = DerivativeMethod::automatic) {
  require_dim(spec, x);
  require_dim(spec, y);
  const double nx = eval_norm(spec, x), ny = eval_norm(spec, y);
  const double a = eval_norm(spec, x + y), b = eval_norm(spec, x - y);
  const double a2 = a * a, b2 = b * b;
  const double lhs = (a2 - b2) * (a2 + b2);
  const double rhs = 8.0 * (nx * nx * rho_pair(spec, x, y, method).rho_lambda(l) +
                            ny * ny * rho_pair(spec, y, x, method).rho_lambda(l));
  return lhs - rhs;
}

/// Estimate of the modulus of convexity
///   delta(eps) = 1 - sup{ ||(x+y)/2|| : ||x|| = ||y|| = 1, ||x - y|| >= eps }.
/// The search finds admissible pairs, so delta_hat is an upper bound on
/// delta(eps); x and y are the best pair found.
struct ModulusEstimate {
  double epsilon = 0.0;
  double delta_hat = 1.0;
  Vector x;
  Vector y;
};

struct ModulusOptions {
  std::size_t starts = 200;
  std::size_t steps = 100;
  std::uint64_t seed = 42;
};

namespace detail {

// The unit vector y on the arc normalize(x + s d), s > 0, with ||x - y|| as
// close to eps as bisection allows while staying >= eps.
inline std::optional<Vector> point_at_distance(const NormSpec& spec, const Vector& x,
                                               const Vector& d, double eps) {
  auto y_of = [&](double s) -> std::optional<Vector> {
    const Vector v = axpy(x, s, d);
    if (eval_norm(spec, v) == 0.0) return std::nullopt;
    return normalize(spec, v);
  };
  double hi = 1.0;
  std::optional<Vector> y_hi;
  for (int k = 0; k < 60; ++k, hi *= 2.0) {
    y_hi = y_of(hi);
    if (y_hi && eval_norm(spec, x - *y_hi) >= eps) break;
    y_hi.reset();
  }
  if (!y_hi) return std::nullopt;
  double lo = 0.0;
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    const auto y = y_of(mid);
    if (y && eval_norm(spec, x - *y) >= eps) {
      hi = mid;
      y_hi = y;
    } else {
      lo = mid;
    }
  }
  return y_hi;
}

}  // namespace detail

/// Multi-start local search over unit pairs on the constraint boundary
/// ||x - y|| = eps: each start perturbs x and the direction from x towards
/// y, keeping improvements and shrinking the step on failure.
inline ModulusEstimate convexity_modulus(const NormSpec& spec, double epsilon,
                                         const ModulusOptions& opt = {}) {
  if (!(epsilon > 0.0 && epsilon <= 2.0))
    throw Error(ErrorCode::invalid_argument, "epsilon must lie in (0, 2]");
  const std::size_t dim = spec.dim();
  const auto structured = structured_points(spec);
  ModulusEstimate best;
  best.epsilon = epsilon;
  double best_mid = -1.0;

  auto midpoint = [&](const Vector& x, const Vector& y) { return eval_norm(spec, 0.5 * (x + y)); };

  for (std::size_t s = 0; s < opt.starts; ++s) {
    Rng rng(split_seed(opt.seed, s));
    Vector x = normalize(spec, (s % 2 == 0 && !structured.empty())
                                   ? structured[rng.index(structured.size())]
                                   : rng.gaussian(dim));
    Vector d = rng.gaussian(dim);
    auto y = detail::point_at_distance(spec, x, d, epsilon);
    if (!y) continue;
    double cur = midpoint(x, *y);
    double step = 0.5;
    for (std::size_t k = 0; k < opt.steps && step > 1e-12; ++k) {
      const Vector x2 = normalize(spec, axpy(x, step, rng.gaussian(dim)));
      const Vector d2 = axpy(d, step, rng.gaussian(dim));
      if (d2.is_zero()) continue;
      auto y2 = detail::point_at_distance(spec, x2, d2, epsilon);
      if (!y2) {
        step *= 0.5;
        continue;
      }
      const double m = midpoint(x2, *y2);
      if (m > cur) {
        x = x2;
        d = d2;
        y = y2;
        cur = m;
        step *= 1.5;
      } else {
        step *= 0.6;
      }
    }
    if (cur > best_mid) {
      best_mid = cur;
      best.x = x;
      best.y = *y;
    }
  }
  if (best_mid < 0.0) throw Error(ErrorCode::invalid_argument, "no admissible pair found");
  best.delta_hat = std::clamp(1.0 - best_mid, 0.0, 1.0);
  return best;
}

/// Result of checking rho_l(x, y) <= 1 - 2 xi on unit pairs with
/// ||x - y|| >= eps. vacuous means xi is numerically zero, so the bound is 1
/// and holds for every unit pair.
struct UcCheckResult {
  enum class Status { pass, witness, vacuous } status = Status::pass;
  double xi_hat = 0.0;
  double bound = 1.0;
  std::size_t trials = 0;
  double max_value = -std::numeric_limits<double>::infinity();
  std::optional<std::pair<Vector, Vector>> witness;
};

inline const char* to_string(UcCheckResult::Status s) {
  switch (s) {
    case UcCheckResult::Status::pass: return "pass";
    case UcCheckResult::Status::witness: return "witness";
    case UcCheckResult::Status::vacuous: return "vacuous";
  }
  return "unknown";
}

/// Same check with xi_hat seeded from a precomputed modulus estimate, so one
/// estimate can serve several lambdas.
inline UcCheckResult uc_rho_bound_check_from(const NormSpec& spec, Lambda l, double epsilon,
                                             double delta_hat, std::size_t trials,
                                             std::uint64_t seed, double tol = 1e-9) {
  if (!(epsilon > 0.0 && epsilon <= 2.0))
    throw Error(ErrorCode::invalid_argument, "epsilon must lie in (0, 2]");
  if (trials == 0) throw Error(ErrorCode::invalid_argument, "trials must be >= 1");
  UcCheckResult out;
  out.xi_hat = delta_hat;

  std::vector<std::pair<Vector, Vector>> pairs;
  const std::size_t max_attempts = 100 * trials;
  for (std::size_t k = 0; pairs.size() < trials && k < max_attempts; ++k) {
    Rng rng(split_seed(seed, k));
    const Vector x = normalize(spec, rng.gaussian(spec.dim()));
    const Vector y = normalize(spec, rng.gaussian(spec.dim()));
    if (eval_norm(spec, x - y) < epsilon) continue;
    out.xi_hat = std::min(out.xi_hat, 1.0 - eval_norm(spec, 0.5 * (x + y)));
    pairs.emplace_back(x, y);
  }
  out.xi_hat = std::max(out.xi_hat, 0.0);
  out.bound = 1.0 - 2.0 * out.xi_hat;
  out.trials = pairs.size();
  for (const auto& [x, y] : pairs) {
    const double r = rho_pair(spec, x, y).rho_lambda(l);
    out.max_value = std::max(out.max_value, r);
    if (r > out.bound + tol && !out.witness) out.witness = std::make_pair(x, y);
  }
  if (out.witness)
    out.status = UcCheckResult::Status::witness;
  else if (out.xi_hat <= 1e-9 || pairs.empty())
    out.status = UcCheckResult::Status::vacuous;
  return out;
}

/// xi_hat starts from the modulus estimate and is lowered to
/// 1 - ||(x+y)/2|| on every sampled pair, so it is a valid convexity
/// constant for the whole sample; the check then runs on the same sample.
inline UcCheckResult uc_rho_bound_check(const NormSpec& spec, Lambda l, double epsilon,
                                        std::size_t trials, std::uint64_t seed,
                                        double tol = 1e-9,
                                        const ModulusOptions& modulus = {}) {
  if (!(epsilon > 0.0 && epsilon <= 2.0))
    throw Error(ErrorCode::invalid_argument, "epsilon must lie in (0, 2]");
  ModulusOptions mopt = modulus;
  mopt.seed = split_seed(seed, 0x6d6f64);
  const double delta = convexity_modulus(spec, epsilon, mopt).delta_hat;
  return uc_rho_bound_check_from(spec, l, epsilon, delta, trials, seed, tol);
}

}  // namespace rholab
