#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rholab/error.hpp"
#include "rholab/random.hpp"
#include "rholab/rational.hpp"
#include "rholab/vector.hpp"

namespace rholab {

/// Exponent p of an l_p norm. p = infinity is a distinguished state (the max
/// norm) rather than a large float.
class Exponent {
 public:
  explicit Exponent(double p) : p_(p) {
    if (std::isnan(p) || p < 1.0)
      throw Error(ErrorCode::invalid_norm,
                  "l_p exponent must lie in [1, inf], got " + format_decimal(p));
  }

  static Exponent infinity() {
    return Exponent(std::numeric_limits<double>::infinity());
  }

  bool is_infinite() const noexcept { return std::isinf(p_); }
  bool is_one() const noexcept { return p_ == 1.0; }
  bool is_two() const noexcept { return p_ == 2.0; }
  double value() const noexcept { return p_; }

  friend bool operator==(const Exponent&, const Exponent&) = default;

 private:
  double p_;
};

class NormSpec;

struct LpNorm {
  Exponent p;
};

struct WeightedLpNorm {
  Exponent p;
  std::vector<double> weights;
};

// N(x) = max_i |<a_i, x>|.
struct PolyhedralNorm {
  std::vector<Vector> functionals;
};

// N(x) = base(A x).
struct LinearImageNorm {
  Matrix matrix;
  std::shared_ptr<const NormSpec> base;
};

enum class NormFamily { lp, weighted_lp, polyhedral, linear_image };

inline const char* to_string(NormFamily f) {
  switch (f) {
    case NormFamily::lp: return "lp";
    case NormFamily::weighted_lp: return "weighted_lp";
    case NormFamily::polyhedral: return "polyhedral";
    case NormFamily::linear_image: return "linear_image";
  }
  return "unknown";
}

/// Declarative, immutable description of a norm on R^dim.
class NormSpec {
 public:
  using Variant = std::variant<LpNorm, WeightedLpNorm, PolyhedralNorm, LinearImageNorm>;

  static NormSpec lp(Exponent p, std::size_t dim) {
    if (dim == 0) throw Error(ErrorCode::invalid_norm, "dimension must be positive");
    return NormSpec(LpNorm{p}, dim);
  }
  static NormSpec lp(double p, std::size_t dim) { return lp(Exponent(p), dim); }
  static NormSpec max_norm(std::size_t dim) { return lp(Exponent::infinity(), dim); }

  static NormSpec weighted_lp(Exponent p, std::vector<double> weights) {
    if (weights.empty()) throw Error(ErrorCode::invalid_norm, "weights must be nonempty");
    for (double w : weights)
      if (!(w > 0.0) || !std::isfinite(w))
        throw Error(ErrorCode::invalid_norm, "weights must be positive and finite");
    const std::size_t dim = weights.size();
    return NormSpec(WeightedLpNorm{p, std::move(weights)}, dim);
  }
  static NormSpec weighted_lp(double p, std::vector<double> weights) {
    return weighted_lp(Exponent(p), std::move(weights));
  }

  static NormSpec polyhedral(std::vector<Vector> functionals) {
    if (functionals.empty())
      throw Error(ErrorCode::invalid_norm, "polyhedral norm needs at least one functional");
    const std::size_t dim = functionals.front().dim();
    if (dim == 0) throw Error(ErrorCode::invalid_norm, "dimension must be positive");
    Matrix rows(functionals.size(), dim);
    for (std::size_t i = 0; i < functionals.size(); ++i) {
      if (functionals[i].dim() != dim)
        throw Error(ErrorCode::invalid_norm, "polyhedral functionals differ in dimension");
      for (std::size_t j = 0; j < dim; ++j) rows(i, j) = functionals[i][j];
    }
    if (rank(rows) < dim)
      throw Error(ErrorCode::invalid_norm,
                  "polyhedral functionals do not span the space");
    return NormSpec(PolyhedralNorm{std::move(functionals)}, dim);
  }

  static NormSpec linear_image(Matrix a, NormSpec base) {
    if (!a.is_square() || a.rows() != base.dim())
      throw Error(ErrorCode::invalid_norm,
                  "linear image matrix must be square with the base dimension");
    if (rank(a) < a.rows())
      throw Error(ErrorCode::invalid_norm, "linear image matrix is singular");
    const std::size_t dim = a.cols();
    return NormSpec(
        LinearImageNorm{std::move(a), std::make_shared<const NormSpec>(std::move(base))},
        dim);
  }

  std::size_t dim() const noexcept { return dim_; }
  const Variant& variant() const noexcept { return v_; }
  NormFamily family() const noexcept { return static_cast<NormFamily>(v_.index()); }

  /// Smooth at every nonzero point (1 < p < inf, or an invertible image of such).
  bool is_smooth() const {
    return std::visit(
        [&](const auto& n) -> bool {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, LpNorm> || std::is_same_v<T, WeightedLpNorm>) {
            return dim_ == 1 || (!n.p.is_infinite() && !n.p.is_one());
          } else if constexpr (std::is_same_v<T, PolyhedralNorm>) {
            return dim_ == 1;
          } else {
            return n.base->is_smooth();
          }
        },
        v_);
  }

  /// Induced by an inner product (l_2 up to an invertible linear change).
  bool is_inner_product() const {
    return std::visit(
        [&](const auto& n) -> bool {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, LpNorm> || std::is_same_v<T, WeightedLpNorm>) {
            return dim_ == 1 || n.p.is_two();
          } else if constexpr (std::is_same_v<T, PolyhedralNorm>) {
            return dim_ == 1;
          } else {
            return n.base->is_inner_product();
          }
        },
        v_);
  }

  /// Every family in the catalogue has closed-form one-sided derivatives.
  bool has_exact_derivative() const noexcept { return true; }

  std::string label() const {
    return std::visit(
        [&](const auto& n) -> std::string {
          using T = std::decay_t<decltype(n)>;
          const std::string d = "[d=" + std::to_string(dim_) + "]";
          if constexpr (std::is_same_v<T, LpNorm>) {
            return "lp(" + format_decimal(n.p.value()) + ")" + d;
          } else if constexpr (std::is_same_v<T, WeightedLpNorm>) {
            return "weighted_lp(" + format_decimal(n.p.value()) + ")" + d;
          } else if constexpr (std::is_same_v<T, PolyhedralNorm>) {
            return "polyhedral(m=" + std::to_string(n.functionals.size()) + ")" + d;
          } else {
            return "linear_image(" + n.base->label() + ")";
          }
        },
        v_);
  }

  double operator()(const Vector& x) const;

  friend bool operator==(const NormSpec& a, const NormSpec& b) {
    if (a.dim_ != b.dim_ || a.v_.index() != b.v_.index()) return false;
    return std::visit(
        [&](const auto& lhs) -> bool {
          using T = std::decay_t<decltype(lhs)>;
          const auto& rhs = std::get<T>(b.v_);
          if constexpr (std::is_same_v<T, LpNorm>) {
            return lhs.p == rhs.p;
          } else if constexpr (std::is_same_v<T, WeightedLpNorm>) {
            return lhs.p == rhs.p && lhs.weights == rhs.weights;
          } else if constexpr (std::is_same_v<T, PolyhedralNorm>) {
            return lhs.functionals == rhs.functionals;
          } else {
            return lhs.matrix == rhs.matrix && *lhs.base == *rhs.base;
          }
        },
        a.v_);
  }

 private:
  NormSpec(Variant v, std::size_t dim) : v_(std::move(v)), dim_(dim) {}

  Variant v_;
  std::size_t dim_;
};

namespace detail {

// Max-scaled evaluation: every ratio |x_i|/m lies in [0, 1], so the power sum
// neither overflows nor loses the dominant term for any finite p.
inline double lp_value(std::span<const double> x, const Exponent& p) {
  double m = 0.0;
  for (double c : x) m = std::max(m, std::abs(c));
  if (p.is_infinite() || m == 0.0) return m;
  if (p.is_one()) {
    double s = 0.0;
    for (double c : x) s += std::abs(c);
    return s;
  }
  double s = 0.0;
  if (p.is_two()) {
    for (double c : x) {
      const double r = c / m;
      s += r * r;
    }
    return m * std::sqrt(s);
  }
  for (double c : x) s += std::pow(std::abs(c) / m, p.value());
  return m * std::pow(s, 1.0 / p.value());
}

// Diagonal D with N(x) = ||D x||_p for a weighted l_p norm.
inline std::vector<double> weighted_scale(const WeightedLpNorm& n) {
  std::vector<double> d(n.weights.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = (n.p.is_infinite() || n.p.is_one()) ? n.weights[i]
                                               : std::pow(n.weights[i], 1.0 / n.p.value());
  return d;
}

inline std::vector<double> scaled(std::span<const double> x, const std::vector<double>& d) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = d[i] * x[i];
  return out;
}

inline std::vector<double> apply(const Matrix& a, std::span<const double> x) {
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) s += a(r, c) * x[c];
    out[r] = s;
  }
  return out;
}

inline double dot(const Vector& a, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += a[i] * x[i];
  return s;
}

inline double eval(const NormSpec& spec, std::span<const double> x) {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LpNorm>) {
          return lp_value(x, n.p);
        } else if constexpr (std::is_same_v<T, WeightedLpNorm>) {
          return lp_value(scaled(x, weighted_scale(n)), n.p);
        } else if constexpr (std::is_same_v<T, PolyhedralNorm>) {
          double m = 0.0;
          for (const auto& a : n.functionals) m = std::max(m, std::abs(dot(a, x)));
          return m;
        } else {
          return eval(*n.base, apply(n.matrix, x));
        }
      },
      spec.variant());
}

}  // namespace detail

inline void require_dim(const NormSpec& spec, const Vector& x) {
  if (x.dim() != spec.dim())
    throw Error(ErrorCode::dimension_mismatch,
                "norm acts on R^" + std::to_string(spec.dim()) +
                    " but vector has dimension " + std::to_string(x.dim()));
}

/// ||x|| for the given norm.
inline double eval_norm(const NormSpec& spec, const Vector& x) {
  require_dim(spec, x);
  return detail::eval(spec, x.coords());
}

inline double NormSpec::operator()(const Vector& x) const { return eval_norm(*this, x); }

/// x / ||x||, renormalized once more if the first division lands outside
/// 1 +- 1e-12.
inline Vector normalize(const NormSpec& spec, const Vector& x) {
  const double n = eval_norm(spec, x);
  if (n == 0.0) throw Error(ErrorCode::zero_vector, "cannot normalize the zero vector");
  Vector v = x / n;
  const double n2 = eval_norm(spec, v);
  if (std::abs(n2 - 1.0) > 1e-12) v = v / n2;
  return v;
}

/// Seeded unit-sphere sample: Gaussian directions normalized by the target
/// norm. Uniform in direction, not in surface measure.
inline std::vector<Vector> sample_unit_sphere(const NormSpec& spec, std::size_t count,
                                              std::uint64_t seed) {
  if (count == 0) throw Error(ErrorCode::invalid_argument, "count must be >= 1");
  Rng rng(seed);
  std::vector<Vector> out;
  out.reserve(count);
  while (out.size() < count) {
    Vector g = rng.gaussian(spec.dim());
    if (eval_norm(spec, g) == 0.0) continue;
    out.push_back(normalize(spec, g));
  }
  return out;
}

namespace detail {

// Nonzero patterns in {-1, 0, 1}^n, all-nonzero patterns first. Capped to
// patterns with at most two nonzeros beyond dimension 6.
inline std::vector<Vector> sign_patterns(std::size_t n) {
  std::vector<Vector> full, rest;
  if (n <= 6) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<double> c(n);
      std::size_t k = code, nonzero = 0;
      for (std::size_t i = 0; i < n; ++i, k /= 3) {
        c[i] = static_cast<double>(static_cast<int>(k % 3) - 1);
        nonzero += c[i] != 0.0;
      }
      if (nonzero == 0) continue;
      (nonzero == n ? full : rest).emplace_back(std::move(c));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (double s : {-1.0, 1.0}) {
        std::vector<double> c(n, 0.0);
        c[i] = s;
        rest.emplace_back(c);
        for (std::size_t j = i + 1; j < n; ++j)
          for (double t : {-1.0, 1.0}) {
            auto c2 = c;
            c2[j] = t;
            rest.emplace_back(std::move(c2));
          }
      }
    }
  }
  full.insert(full.end(), rest.begin(), rest.end());
  return full;
}

}  // namespace detail

/// Candidate points where the norm is most likely to be nonsmooth (ball
/// vertices, points with vanishing coordinates, points where two polyhedral
/// functionals tie), mapped back through any linear change of variables.
inline std::vector<Vector> structured_points(const NormSpec& spec) {
  return std::visit(
      [&](const auto& n) -> std::vector<Vector> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LpNorm>) {
          return detail::sign_patterns(spec.dim());
        } else if constexpr (std::is_same_v<T, WeightedLpNorm>) {
          const auto d = detail::weighted_scale(n);
          std::vector<Vector> out;
          for (const auto& u : detail::sign_patterns(spec.dim())) {
            std::vector<double> c(u.dim());
            for (std::size_t i = 0; i < c.size(); ++i) c[i] = u[i] / d[i];
            out.emplace_back(std::move(c));
          }
          return out;
        } else if constexpr (std::is_same_v<T, PolyhedralNorm>) {
          // Least-norm solutions of <a_i,x> = 1, <a_j,x> = +-1.
          std::vector<Vector> out;
          const auto& f = n.functionals;
          for (std::size_t i = 0; i < f.size(); ++i) {
            for (std::size_t j = i + 1; j < f.size(); ++j) {
              const double gii = dot(f[i], f[i]), gjj = dot(f[j], f[j]), gij = dot(f[i], f[j]);
              const double det = gii * gjj - gij * gij;
              if (std::abs(det) <= 1e-12 * gii * gjj) continue;
              for (double s : {1.0, -1.0}) {
                const double alpha = (gjj * 1.0 - gij * s) / det;
                const double beta = (gii * s - gij * 1.0) / det;
                Vector x = alpha * f[i] + beta * f[j];
                if (!x.is_zero()) out.push_back(x / eval_norm(spec, x));
              }
            }
          }
          for (const auto& u : detail::sign_patterns(spec.dim())) out.push_back(u);
          return out;
        } else {
          auto inv = inverse(n.matrix);
          std::vector<Vector> out;
          if (!inv) return out;
          for (const auto& u : structured_points(*n.base)) out.push_back(*inv * u);
          return out;
        }
      },
      spec.variant());
}

struct AxiomViolation {
  enum class Kind { homogeneity, triangle, definiteness } kind;
  Vector x;
  Vector y;
  double alpha = 0.0;
  double excess = 0.0;
};

struct AxiomReport {
  bool passed = true;
  std::size_t trials = 0;
  std::optional<AxiomViolation> first_violation;
};

/// Samples random vectors and scalars and checks absolute homogeneity and the
/// triangle inequality at relative tolerance 1e-12.
inline AxiomReport validate_norm_axioms(const NormSpec& spec, std::size_t trials,
                                        std::uint64_t seed) {
  if (trials == 0) throw Error(ErrorCode::invalid_argument, "trials must be >= 1");
  constexpr double tol = 1e-12;
  const auto structured = structured_points(spec);
  AxiomReport report;
  for (std::size_t k = 0; k < trials; ++k) {
    Rng rng(split_seed(seed, k));
    Vector x = (k % 4 == 0 && !structured.empty())
                   ? structured[(k / 4) % structured.size()]
                   : rng.log_uniform_scale(1.0) * rng.gaussian(spec.dim());
    Vector y = rng.log_uniform_scale(1.0) * rng.gaussian(spec.dim());
    const double alpha = (rng.coin() ? -1.0 : 1.0) * rng.log_uniform_scale(2.0);
    ++report.trials;

    const double nx = eval_norm(spec, x), ny = eval_norm(spec, y);
    if (!(nx > 0.0) || !(ny > 0.0)) {
      report.passed = false;
      report.first_violation = AxiomViolation{AxiomViolation::Kind::definiteness, x, y, 0.0,
                                              nx > 0.0 ? ny : nx};
      return report;
    }
    const double h = std::abs(eval_norm(spec, alpha * x) - std::abs(alpha) * nx);
    if (h > tol * std::abs(alpha) * nx) {
      report.passed = false;
      report.first_violation = AxiomViolation{AxiomViolation::Kind::homogeneity, x, y, alpha, h};
      return report;
    }
    const double excess = eval_norm(spec, x + y) - nx - ny;
    if (excess > tol * (nx + ny)) {
      report.passed = false;
      report.first_violation = AxiomViolation{AxiomViolation::Kind::triangle, x, y, 0.0, excess};
      return report;
    }
  }
  return report;
}

}  // namespace rholab
