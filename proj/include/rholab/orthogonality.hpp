#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rholab/derivatives.hpp"
#include "rholab/error.hpp"
#include "rholab/norm.hpp"
#include "rholab/random.hpp"
#include "rholab/rational.hpp"
#include "rholab/vector.hpp"

namespace rholab {

/// One of the orthogonality relations x ⊥ y.
class Relation {
 public:
  enum class Kind { birkhoff, isosceles, rho_minus, rho_plus, rho_mid, rho_star, rho_lambda };

  static Relation birkhoff() { return Relation(Kind::birkhoff); }
  static Relation isosceles() { return Relation(Kind::isosceles); }
  static Relation rho_minus() { return Relation(Kind::rho_minus); }
  static Relation rho_plus() { return Relation(Kind::rho_plus); }
  static Relation rho_mid() { return Relation(Kind::rho_mid); }
  static Relation rho_star() { return Relation(Kind::rho_star); }
  static Relation rho_lambda(Lambda l) { return Relation(Kind::rho_lambda, l); }

  /// Accepts "birkhoff"/"B", "isosceles"/"I", "rho-", "rho+", "rho", "rho*",
  /// the long forms "rho_minus", "rho_plus", "rho_mid", "rho_star", and
  /// "rho_lambda:0.3" or "rho_lambda(0.3)".
  static Relation parse(std::string_view text) {
    const std::string s(detail::trim(text));
    if (s == "B" || s == "birkhoff") return birkhoff();
    if (s == "I" || s == "isosceles") return isosceles();
    if (s == "rho-" || s == "rho_minus") return rho_minus();
    if (s == "rho+" || s == "rho_plus") return rho_plus();
    if (s == "rho" || s == "rho_mid") return rho_mid();
    if (s == "rho*" || s == "rho_star") return rho_star();
    constexpr std::string_view head = "rho_lambda";
    if (s.rfind(head, 0) == 0) {
      std::string rest = s.substr(head.size());
      if (!rest.empty() && rest.front() == ':') {
        rest = rest.substr(1);
      } else if (rest.size() >= 2 && rest.front() == '(' && rest.back() == ')') {
        rest = rest.substr(1, rest.size() - 2);
      } else {
        rest.clear();
      }
      if (!rest.empty()) return rho_lambda(Lambda(parse_scalar(rest)));
    }
    throw Error(ErrorCode::invalid_argument, "unknown orthogonality relation '" + s + "'");
  }

  Kind kind() const noexcept { return kind_; }
  const std::optional<Lambda>& lambda() const noexcept { return lambda_; }
  bool is_rho_family() const noexcept {
    return kind_ != Kind::birkhoff && kind_ != Kind::isosceles;
  }

  /// The weight of rho_- in the functional this relation zeroes, when it is
  /// a linear combination of rho_- and rho_+.
  std::optional<Lambda> linear_weight() const {
    switch (kind_) {
      case Kind::rho_minus: return Lambda(1.0);
      case Kind::rho_plus: return Lambda(0.0);
      case Kind::rho_mid: return Lambda(0.5);
      case Kind::rho_lambda: return *lambda_;
      default: return std::nullopt;
    }
  }

  std::string name() const {
    switch (kind_) {
      case Kind::birkhoff: return "birkhoff";
      case Kind::isosceles: return "isosceles";
      case Kind::rho_minus: return "rho-";
      case Kind::rho_plus: return "rho+";
      case Kind::rho_mid: return "rho";
      case Kind::rho_star: return "rho*";
      case Kind::rho_lambda: return "rho_lambda(" + format_scalar(lambda_->value()) + ")";
    }
    return "unknown";
  }

  friend bool operator==(const Relation&, const Relation&) = default;

 private:
  explicit Relation(Kind k, std::optional<Lambda> l = std::nullopt) : kind_(k), lambda_(l) {}

  Kind kind_;
  std::optional<Lambda> lambda_;
};

/// Outcome of an orthogonality test. The relation holds when
/// |residual| <= tol_used * scale + uncertainty; uncertainty is the
/// enclosure radius of a numerical derivative and 0 on the exact path.
struct OrthResult {
  bool orthogonal = false;
  double residual = 0.0;
  double tol_used = 0.0;
  double scale = 0.0;
  double uncertainty = 0.0;

  double normalized() const { return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual); }
};

namespace detail {

inline OrthResult finish(double residual, double tol, double scale, double uncertainty) {
  OrthResult r;
  r.residual = residual;
  r.tol_used = tol;
  r.scale = scale;
  r.uncertainty = uncertainty;
  r.orthogonal = std::abs(residual) <= tol * scale + uncertainty;
  return r;
}

}  // namespace detail

/// Residuals: Birkhoff max(0, rho_-, -rho_+) (the relation holds iff
/// rho_- <= 0 <= rho_+); Isosceles (||x+y||^2 - ||x-y||^2)/4, which is <x,y>
/// for an inner-product norm; rho* the factor of smaller magnitude carrying
/// the sign of the product; the remaining relations their functional. All
/// residuals are compared at scale ||x|| ||y||.
inline OrthResult check(const Relation& rel, const NormSpec& spec, const Vector& x,
                        const Vector& y, double tol = 1e-8,
                        DerivativeMethod method = DerivativeMethod::automatic) {
  require_dim(spec, x);
  require_dim(spec, y);
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_argument, "tol must be positive");
  const double nx = eval_norm(spec, x), ny = eval_norm(spec, y);
  if (rel.kind() == Relation::Kind::isosceles) {
    const double a = eval_norm(spec, x + y), b = eval_norm(spec, x - y);
    return detail::finish(0.25 * (a - b) * (a + b), tol, nx * ny, 0.0);
  }
  const auto p = rho_pair(spec, x, y, method);
  const double scale = nx * ny;
  const double u = p.enclosure_radius;
  switch (rel.kind()) {
    case Relation::Kind::birkhoff:
      return detail::finish(std::max({0.0, p.rho_minus, -p.rho_plus}), tol, scale, u);
    case Relation::Kind::rho_star: {
      const double m = std::min(std::abs(p.rho_minus), std::abs(p.rho_plus));
      return detail::finish(p.rho_star() < 0.0 ? -m : m, tol, scale, u);
    }
    default:
      return detail::finish(p.rho_lambda(*rel.linear_weight()), tol, scale, u);
  }
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double t) const { return lo <= t && t <= hi; }
};

/// All t with x ⊥_B (t x + y): [-rho_+(x,y)/||x||^2, -rho_-(x,y)/||x||^2].
inline Interval birkhoff_interval(const NormSpec& spec, const Vector& x, const Vector& y,
                                  DerivativeMethod method = DerivativeMethod::automatic) {
  require_dim(spec, x);
  require_dim(spec, y);
  if (x.is_zero()) throw Error(ErrorCode::zero_vector, "x must be nonzero");
  const double nx = eval_norm(spec, x);
  const auto p = rho_pair(spec, x, y, method);
  return {-p.rho_plus / (nx * nx), -p.rho_minus / (nx * nx)};
}

struct Orthogonalization {
  double t = 0.0;
  Vector z;
  double residual = 0.0;  // rho_lambda(x, z)
  bool verified = false;  // |residual| <= tol ||x|| ||z||
};

/// t = -rho_lambda(x,y)/||x||^2 and z = t x + y, so that rho_lambda(x, z) = 0.
inline Orthogonalization rho_lambda_orthogonalize(
    const NormSpec& spec, Lambda l, const Vector& x, const Vector& y, double tol = 1e-8,
    DerivativeMethod method = DerivativeMethod::automatic) {
  require_dim(spec, x);
  require_dim(spec, y);
  if (x.is_zero()) throw Error(ErrorCode::zero_vector, "x must be nonzero");
  const double nx = eval_norm(spec, x);
  Orthogonalization out;
  out.t = -rho_pair(spec, x, y, method).rho_lambda(l) / (nx * nx);
  out.z = axpy(y, out.t, x);
  const auto p = rho_pair(spec, x, out.z, method);
  out.residual = p.rho_lambda(l);
  out.verified =
      std::abs(out.residual) <= tol * nx * eval_norm(spec, out.z) + p.enclosure_radius;
  return out;
}

struct ProbeOptions {
  std::size_t trials = 10000;
  std::uint64_t seed = 42;
  double tol = 1e-8;
  DerivativeMethod method = DerivativeMethod::automatic;
  bool shrink = true;
};

struct ProbeResult {
  enum class Status { pass, witness, starvation } status = Status::pass;
  std::size_t trials = 0;    // relA-pairs tested
  std::size_t attempts = 0;  // generated candidates
  std::optional<std::array<Vector, 2>> witness;
  OrthResult in_a;  // relA at the witness
  OrthResult in_b;  // relB at the witness
};

inline const char* to_string(ProbeResult::Status s) {
  switch (s) {
    case ProbeResult::Status::pass: return "pass";
    case ProbeResult::Status::witness: return "witness";
    case ProbeResult::Status::starvation: return "starvation";
  }
  return "unknown";
}

namespace detail {

// A candidate pair for relA built from one seeded stream.
inline std::array<Vector, 2> candidate_pair(const Relation& rel, const NormSpec& spec,
                                            const std::vector<Vector>& structured,
                                            std::size_t attempt, Rng& rng,
                                            DerivativeMethod method) {
  const std::size_t d = spec.dim();
  const bool use_structured = attempt % 2 == 0 && !structured.empty();
  Vector x = use_structured ? structured[rng.index(structured.size())] : rng.gaussian(d);
  x = rng.log_uniform_scale(1.0) * x;
  Vector y = rng.log_uniform_scale(1.0) * rng.gaussian(d);

  switch (rel.kind()) {
    case Relation::Kind::isosceles: {
      // x + y = u and x - y = v with ||u|| = ||v||
      const double s = rng.log_uniform_scale(1.0);
      const Vector u = s * normalize(spec, use_structured ? x : rng.gaussian(d));
      const Vector v = s * normalize(spec, rng.gaussian(d));
      return {0.5 * (u + v), 0.5 * (u - v)};
    }
    case Relation::Kind::birkhoff: {
      const auto iv = birkhoff_interval(spec, x, y, method);
      double t = iv.lo;
      switch (rng.index(3)) {
        case 0: t = iv.lo; break;
        case 1: t = iv.hi; break;
        default: t = iv.lo + rng.uniform() * iv.width();
      }
      return {x, axpy(y, t, x)};
    }
    case Relation::Kind::rho_star: {
      const Lambda side(rng.coin() ? 1.0 : 0.0);
      return {x, rho_lambda_orthogonalize(spec, side, x, y, 1e-8, method).z};
    }
    default:
      return {x, rho_lambda_orthogonalize(spec, *rel.linear_weight(), x, y, 1e-8, method).z};
  }
}

inline bool scale_invariant(const Relation& rel) {
  return rel.kind() != Relation::Kind::isosceles;
}

inline Vector round_to(const Vector& v, double den) {
  std::vector<double> c(v.dim());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::round(v[i] * den) / den;
  return Vector(std::move(c));
}

}  // namespace detail

/// Searches for a pair with x relA y but not x relB y. relA must hold at
/// tol/10 and relB must fail by more than tol * scale, so reported witnesses
/// survive the gap between the two tolerances. Candidates alternate between
/// structured and Gaussian x and are built constructively in the zero set of
/// relA. Attempt k draws from the stream split_seed(seed, k).
inline ProbeResult inclusion_probe(const Relation& rel_a, const Relation& rel_b,
                                   const NormSpec& spec, const ProbeOptions& opt = {}) {
  if (opt.trials == 0) throw Error(ErrorCode::invalid_argument, "trials must be >= 1");
  const double strict = opt.tol / 10.0;
  const auto structured = structured_points(spec);
  ProbeResult out;
  const std::size_t max_attempts = 100 * opt.trials;

  auto is_witness = [&](const Vector& x, const Vector& y, OrthResult& a, OrthResult& b) {
    if (x.is_zero() || y.is_zero()) return false;
    a = check(rel_a, spec, x, y, strict, opt.method);
    if (!a.orthogonal) return false;
    b = check(rel_b, spec, x, y, opt.tol, opt.method);
    return !b.orthogonal;
  };

  while (out.trials < opt.trials) {
    if (out.attempts >= max_attempts) {
      out.status = ProbeResult::Status::starvation;
      return out;
    }
    Rng rng(split_seed(opt.seed, out.attempts));
    const auto pair = detail::candidate_pair(rel_a, spec, structured, out.attempts, rng, opt.method);
    ++out.attempts;
    const auto& [x, y] = pair;
    if (x.is_zero() || y.is_zero()) continue;
    OrthResult a = check(rel_a, spec, x, y, strict, opt.method);
    if (!a.orthogonal) continue;
    ++out.trials;
    OrthResult b = check(rel_b, spec, x, y, opt.tol, opt.method);
    if (b.orthogonal) continue;

    out.status = ProbeResult::Status::witness;
    out.witness = pair;
    out.in_a = a;
    out.in_b = b;
    if (opt.shrink) {
      Vector xs = x, ys = y;
      if (detail::scale_invariant(rel_a) && detail::scale_invariant(rel_b)) {
        xs = x / x.max_abs();
        ys = y / y.max_abs();
      }
      for (double den : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 16.0, 32.0, 64.0}) {
        const Vector xr = detail::round_to(xs, den), yr = detail::round_to(ys, den);
        OrthResult ra, rb;
        if (is_witness(xr, yr, ra, rb)) {
          out.witness = std::array<Vector, 2>{xr, yr};
          out.in_a = ra;
          out.in_b = rb;
          break;
        }
      }
    }
    return out;
  }
  return out;
}

}  // namespace rholab
