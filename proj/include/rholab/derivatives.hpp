#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rholab/error.hpp"
#include "rholab/norm.hpp"
#include "rholab/random.hpp"
#include "rholab/vector.hpp"

namespace rholab {

/// Interpolation weight in [0, 1] between the left (weight 1) and right
/// (weight 0) norm derivatives.
class Lambda {
 public:
  explicit Lambda(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0))
      throw Error(ErrorCode::invalid_argument,
                  "lambda must lie in [0, 1], got " + format_decimal(value));
  }
  double value() const noexcept { return value_; }
  Lambda complement() const { return Lambda(1.0 - value_); }
  friend bool operator==(const Lambda&, const Lambda&) = default;

 private:
  double value_;
};

enum class DerivativeMethod { automatic, exact, numerical };

/// Step schedule of the one-sided difference-quotient enclosure.
struct NumericalOptions {
  double t0 = 0x1p-4;
  double t_min = 0x1p-40;
  double bracket_tol = 1e-10;
  // converged == (enclosure_radius <= requested_tol * ||x|| * ||y||)
  double requested_tol = 1e-6;
};

struct DerivativePair {
  double rho_minus = 0.0;
  double rho_plus = 0.0;
  double enclosure_radius = 0.0;
  enum class Method { exact, numerical } method = Method::exact;
  bool converged = true;

  double rho_lambda(Lambda l) const {
    return l.value() * rho_minus + (1.0 - l.value()) * rho_plus;
  }
  double rho_mid() const { return 0.5 * (rho_minus + rho_plus); }
  double rho_star() const { return rho_minus * rho_plus; }
};

namespace detail {

struct RawPair {
  double minus;
  double plus;
};

// Active-set membership for max-type norms.
constexpr double active_tol = 1e-12;

inline RawPair exact_lp(std::span<const double> x, std::span<const double> y,
                        const Exponent& p) {
  const std::size_t n = x.size();
  if (p.is_infinite()) {
    double m = 0.0;
    for (double c : x) m = std::max(m, std::abs(c));
    if (m == 0.0) return {0.0, 0.0};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (m - std::abs(x[i]) > active_tol * m) continue;
      const double v = (x[i] > 0 ? 1.0 : -1.0) * y[i];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return {m * lo, m * hi};
  }
  if (p.is_one()) {
    double norm = 0.0;
    for (double c : x) norm += std::abs(c);
    if (norm == 0.0) return {0.0, 0.0};
    double s = 0.0, a = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(x[i]) <= active_tol * norm)
        a += std::abs(y[i]);
      else
        s += (x[i] > 0 ? 1.0 : -1.0) * y[i];
    }
    return {norm * (s - a), norm * (s + a)};
  }
  if (p.is_two()) {
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += x[i] * y[i];
    return {d, d};
  }
  // ||x||^{2-p} sum sign(x_i)|x_i|^{p-1} y_i, evaluated on u = x / max|x_i|.
  double m = 0.0;
  for (double c : x) m = std::max(m, std::abs(c));
  if (m == 0.0) return {0.0, 0.0};
  const double pv = p.value();
  double sum_p = 0.0, s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::abs(x[i]) / m;
    if (u == 0.0) continue;
    sum_p += std::pow(u, pv);
    s += (x[i] > 0 ? 1.0 : -1.0) * std::pow(u, pv - 1.0) * y[i];
  }
  const double nu = std::pow(sum_p, 1.0 / pv);
  const double d = m * std::pow(nu, 2.0 - pv) * s;
  return {d, d};
}

inline RawPair exact_pair(const NormSpec& spec, std::span<const double> x,
                          std::span<const double> y) {
  return std::visit(
      [&](const auto& n) -> RawPair {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LpNorm>) {
          return exact_lp(x, y, n.p);
        } else if constexpr (std::is_same_v<T, WeightedLpNorm>) {
          const auto d = weighted_scale(n);
          return exact_lp(scaled(x, d), scaled(y, d), n.p);
        } else if constexpr (std::is_same_v<T, PolyhedralNorm>) {
          double m = 0.0;
          std::vector<double> v(n.functionals.size());
          for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = dot(n.functionals[i], x);
            m = std::max(m, std::abs(v[i]));
          }
          if (m == 0.0) return {0.0, 0.0};
          double lo = std::numeric_limits<double>::infinity();
          double hi = -std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < v.size(); ++i) {
            if (m - std::abs(v[i]) > active_tol * m) continue;
            const double w = (v[i] > 0 ? 1.0 : -1.0) * dot(n.functionals[i], y);
            lo = std::min(lo, w);
            hi = std::max(hi, w);
          }
          return {m * lo, m * hi};
        } else {
          return exact_pair(*n.base, apply(n.matrix, x), apply(n.matrix, y));
        }
      },
      spec.variant());
}

struct OneSided {
  double value;
  double radius;
};

// Limit of g(t) = (||x + t y|| - ||x||) / t as t -> 0 from side s (+1/-1) for
// unit-scale x, y, sampled on t_k = t0 2^-k. Convexity makes g nondecreasing
// in t, so g(t) (s = +1) bounds rho_+ from above and g(-t) (s = -1) bounds
// rho_- from below at every step. The error of g is a power series in t^a
// whose leading exponent a is read off the ratio of successive differences
// (a = 1 at smooth points, a = p - 1 at a vanishing l_p coordinate), and the
// leading term is extrapolated away. The radius is twice the larger of the
// last three changes between successive extrapolants (a single change can
// vanish where the error crosses zero) plus the amplified rounding noise.
inline OneSided one_sided_limit(const NormSpec& spec, const Vector& x, const Vector& y,
                                double nx, double s, const NumericalOptions& opt) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  auto g = [&](double t) { return (detail::eval(spec, axpy(x, s * t, y).coords()) - nx) / (s * t); };

  double t = opt.t0;
  double g_prev = g(t);
  double d_prev = 0.0;
  std::optional<double> e_prev;
  double de_prev = std::numeric_limits<double>::infinity();
  double de_prev2 = std::numeric_limits<double>::infinity();
  OneSided best{g_prev, std::numeric_limits<double>::infinity()};
  double best_score = std::numeric_limits<double>::infinity();
  while (t * 0.5 >= opt.t_min) {
    t *= 0.5;
    const double g_cur = g(t);
    const double d = g_cur - g_prev;
    double factor = 1.0;  // Richardson for a linear leading term
    if (d_prev != 0.0) {
      const double r = d / d_prev;
      if (r > 0.05 && r < 0.9) factor = r / (1.0 - r);
    }
    const double e = g_cur + factor * d;
    const double noise = 16.0 * eps / t * (1.0 + 2.0 * factor);
    if (e_prev) {
      const double de = std::abs(e - *e_prev);
      const double change = std::max({de, de_prev, de_prev2});
      const double score = 2.0 * change + noise;
      de_prev2 = de_prev;
      de_prev = de;
      if (score < best_score) {
        best_score = score;
        best = {e, score};
      }
      if (std::abs(d) < opt.bracket_tol && change < opt.bracket_tol) break;
      if (noise > 4.0 * best_score) break;
    }
    e_prev = e;
    d_prev = d;
    g_prev = g_cur;
  }
  return best;
}

}  // namespace detail

/// Monotone difference-quotient enclosure of (rho_-, rho_+). Inputs are
/// rescaled to unit norm so the step schedule is scale invariant.
inline DerivativePair numerical_rho_pair(const NormSpec& spec, const Vector& x, const Vector& y,
                                         const NumericalOptions& opt = {}) {
  require_dim(spec, x);
  require_dim(spec, y);
  DerivativePair out;
  out.method = DerivativePair::Method::numerical;
  const double nx = eval_norm(spec, x), ny = eval_norm(spec, y);
  if (nx == 0.0 || ny == 0.0) return out;
  const Vector xu = x / nx, yu = y / ny;
  const double nxu = eval_norm(spec, xu);
  const auto plus = detail::one_sided_limit(spec, xu, yu, nxu, +1.0, opt);
  const auto minus = detail::one_sided_limit(spec, xu, yu, nxu, -1.0, opt);
  const double scale = nx * ny * nxu;
  out.rho_plus = scale * plus.value;
  out.rho_minus = scale * minus.value;
  out.enclosure_radius = scale * std::max(plus.radius, minus.radius);
  out.converged = std::max(plus.radius, minus.radius) <= opt.requested_tol;
  return out;
}

/// One-sided norm derivatives rho_-(x, y) and rho_+(x, y).
inline DerivativePair rho_pair(const NormSpec& spec, const Vector& x, const Vector& y,
                               DerivativeMethod method = DerivativeMethod::automatic,
                               const NumericalOptions& opt = {}) {
  require_dim(spec, x);
  require_dim(spec, y);
  if (x.is_zero()) return DerivativePair{};
  if (method == DerivativeMethod::numerical ||
      (method == DerivativeMethod::automatic && !spec.has_exact_derivative()))
    return numerical_rho_pair(spec, x, y, opt);
  const auto raw = detail::exact_pair(spec, x.coords(), y.coords());
  DerivativePair out;
  out.rho_minus = raw.minus;
  out.rho_plus = raw.plus;
  return out;
}

inline double rho_lambda(const NormSpec& spec, Lambda l, const Vector& x, const Vector& y,
                         DerivativeMethod method = DerivativeMethod::automatic) {
  return rho_pair(spec, x, y, method).rho_lambda(l);
}

inline double rho_mid(const NormSpec& spec, const Vector& x, const Vector& y,
                      DerivativeMethod method = DerivativeMethod::automatic) {
  return rho_pair(spec, x, y, method).rho_mid();
}

inline double rho_star(const NormSpec& spec, const Vector& x, const Vector& y,
                       DerivativeMethod method = DerivativeMethod::automatic) {
  return rho_pair(spec, x, y, method).rho_star();
}

struct SmoothnessResult {
  bool smooth = true;
  std::optional<Vector> witness;  // direction y with rho_+(x,y) > rho_-(x,y)
  double gap = 0.0;               // rho_+ - rho_- at the witness
};

namespace detail {

// Structural nonsmoothness witness for the exact families.
inline std::optional<std::vector<double>> nonsmooth_direction(const NormSpec& spec,
                                                              std::span<const double> x) {
  return std::visit(
      [&](const auto& n) -> std::optional<std::vector<double>> {
        using T = std::decay_t<decltype(n)>;
        auto lp_witness = [&](std::span<const double> u,
                              const Exponent& p) -> std::optional<std::vector<double>> {
          const std::size_t d = u.size();
          if (p.is_infinite()) {
            double m = 0.0;
            for (double c : u) m = std::max(m, std::abs(c));
            std::optional<std::size_t> first;
            for (std::size_t i = 0; i < d; ++i) {
              if (m - std::abs(u[i]) > active_tol * m) continue;
              if (!first) {
                first = i;
                continue;
              }
              std::vector<double> w(d, 0.0);
              w[i] = u[i] > 0 ? -1.0 : 1.0;
              return w;
            }
            return std::nullopt;
          }
          if (p.is_one()) {
            double norm = 0.0;
            for (double c : u) norm += std::abs(c);
            for (std::size_t i = 0; i < d; ++i)
              if (std::abs(u[i]) <= active_tol * norm) {
                std::vector<double> w(d, 0.0);
                w[i] = 1.0;
                return w;
              }
          }
          return std::nullopt;
        };
        if constexpr (std::is_same_v<T, LpNorm>) {
          return lp_witness(x, n.p);
        } else if constexpr (std::is_same_v<T, WeightedLpNorm>) {
          const auto d = weighted_scale(n);
          auto w = lp_witness(scaled(x, d), n.p);
          if (w)
            for (std::size_t i = 0; i < w->size(); ++i) (*w)[i] /= d[i];
          return w;
        } else if constexpr (std::is_same_v<T, PolyhedralNorm>) {
          double m = 0.0;
          std::vector<double> v(n.functionals.size());
          for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = dot(n.functionals[i], x);
            m = std::max(m, std::abs(v[i]));
          }
          std::optional<Vector> first;
          for (std::size_t i = 0; i < v.size(); ++i) {
            if (m - std::abs(v[i]) > active_tol * m) continue;
            Vector signed_a = (v[i] > 0 ? 1.0 : -1.0) * n.functionals[i];
            if (!first) {
              first = signed_a;
              continue;
            }
            Vector w = *first - signed_a;
            if (w.max_abs() > active_tol * first->max_abs()) return w.to_std();
          }
          return std::nullopt;
        } else {
          auto w = nonsmooth_direction(*n.base, apply(n.matrix, x));
          if (!w) return std::nullopt;
          auto inv = inverse(n.matrix);
          return (*inv * Vector(std::move(*w))).to_std();
        }
      },
      spec.variant());
}

}  // namespace detail

/// Whether rho_-(x, .) = rho_+(x, .). Exact families answer from the active
/// set structure; the numerical method samples `directions` random unit
/// directions plus the coordinate axes and flags a gap above tol*||x||*||y||.
inline SmoothnessResult is_smooth_at(const NormSpec& spec, const Vector& x,
                                     std::size_t directions = 64, double tol = 1e-8,
                                     DerivativeMethod method = DerivativeMethod::automatic,
                                     std::uint64_t seed = 0) {
  require_dim(spec, x);
  if (x.is_zero())
    throw Error(ErrorCode::zero_vector, "smoothness is undefined at the origin");
  SmoothnessResult out;
  if (method != DerivativeMethod::numerical && spec.has_exact_derivative()) {
    if (auto w = detail::nonsmooth_direction(spec, x.coords())) {
      Vector wv(std::move(*w));
      const auto pair = rho_pair(spec, x, wv, DerivativeMethod::exact);
      out.smooth = false;
      out.gap = pair.rho_plus - pair.rho_minus;
      out.witness = std::move(wv);
    }
    return out;
  }
  const double nx = eval_norm(spec, x);
  Rng rng(seed);
  std::vector<Vector> dirs;
  for (std::size_t i = 0; i < spec.dim(); ++i) dirs.push_back(Vector::basis(spec.dim(), i));
  for (std::size_t k = 0; k < directions; ++k) dirs.push_back(rng.gaussian(spec.dim()));
  for (const auto& d : dirs) {
    const Vector y = normalize(spec, d);
    const auto pair = rho_pair(spec, x, y, DerivativeMethod::numerical);
    const double gap = pair.rho_plus - pair.rho_minus;
    if (gap > tol * nx + 2.0 * pair.enclosure_radius) {
      out.smooth = false;
      out.gap = gap;
      out.witness = y;
      return out;
    }
  }
  return out;
}

/// Raised by gateaux_differential at a point where the norm is not
/// Gateaux differentiable.
class NonsmoothPointError : public Error {
 public:
  NonsmoothPointError(Vector witness, double gap)
      : Error(ErrorCode::nonsmooth_point,
              "norm is not smooth at this point; rho_+ - rho_- = " + format_decimal(gap) +
                  " in direction " + format_vector(witness)),
        witness_(std::move(witness)),
        gap_(gap) {}
  const Vector& witness() const noexcept { return witness_; }
  double gap() const noexcept { return gap_; }

 private:
  Vector witness_;
  double gap_;
};

/// The Gateaux differential f_x, stored by its coefficient vector so that
/// f_x(y) = <c, y>.
class GateauxDifferential {
 public:
  GateauxDifferential(Vector coefficients, Vector base_point)
      : coefficients_(std::move(coefficients)), base_point_(std::move(base_point)) {}

  double apply(const Vector& y) const { return dot(coefficients_, y); }
  double operator()(const Vector& y) const { return apply(y); }
  const Vector& coefficients() const noexcept { return coefficients_; }
  const Vector& base_point() const noexcept { return base_point_; }

 private:
  Vector coefficients_;
  Vector base_point_;
};

inline GateauxDifferential gateaux_differential(
    const NormSpec& spec, const Vector& x, double tol = 1e-8,
    DerivativeMethod method = DerivativeMethod::automatic) {
  const auto smooth = is_smooth_at(spec, x, 64, tol, method);
  if (!smooth.smooth) throw NonsmoothPointError(*smooth.witness, smooth.gap);
  const double nx = eval_norm(spec, x);
  std::vector<double> c(spec.dim());
  for (std::size_t j = 0; j < c.size(); ++j)
    c[j] = rho_pair(spec, x, Vector::basis(spec.dim(), j), method).rho_mid() / nx;
  return GateauxDifferential(Vector(std::move(c)), x);
}

}  // namespace rholab
