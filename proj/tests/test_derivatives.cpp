#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "rholab/derivatives.hpp"

using namespace rholab;

namespace {

std::vector<NormSpec> catalogue(std::size_t dim) {
  std::vector<double> w;
  for (std::size_t i = 0; i < dim; ++i) w.push_back(1.0 + static_cast<double>(i));
  Matrix shear = Matrix::identity(dim);
  for (std::size_t i = 0; i + 1 < dim; ++i) shear(i, i + 1) = 0.5;
  std::vector<Vector> fs;
  for (std::size_t i = 0; i < dim; ++i) fs.push_back(Vector::basis(dim, i));
  for (std::size_t i = 0; i + 1 < dim; ++i)
    fs.push_back(Vector::basis(dim, i) - Vector::basis(dim, i + 1));
  return {NormSpec::lp(1, dim),
          NormSpec::lp(1.5, dim),
          NormSpec::lp(2, dim),
          NormSpec::lp(3, dim),
          NormSpec::max_norm(dim),
          NormSpec::weighted_lp(3, w),
          NormSpec::weighted_lp(Exponent::infinity(), w),
          NormSpec::polyhedral(fs),
          NormSpec::linear_image(shear, NormSpec::lp(4, dim)),
          NormSpec::linear_image(shear, NormSpec::lp(1, dim))};
}

// Brute-force one-sided limit: difference quotients at t = 10^-1 .. 10^-8
// followed by Richardson extrapolation on the last few levels.
double quotient_oracle(const NormSpec& n, const Vector& x, const Vector& y, double side) {
  const double nx = n(x);
  std::vector<double> g;
  for (int k = 1; k <= 8; ++k) {
    const double t = side * std::pow(10.0, -k);
    g.push_back((n(x + t * y) - nx) / t);
  }
  // linear-in-t error: extrapolate with ratio 10
  const double r = (10.0 * g[5] - g[4]) / 9.0;
  return nx * r;
}

struct Pair {
  Vector x, y;
};

std::vector<Pair> sampled_pairs(const NormSpec& n, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  const auto structured = structured_points(n);
  std::vector<Pair> out;
  for (std::size_t k = 0; k < count; ++k) {
    Vector x = (k % 3 == 0) ? structured[rng.index(structured.size())] : rng.gaussian(n.dim());
    Vector y = (k % 5 == 1) ? structured[rng.index(structured.size())] : rng.gaussian(n.dim());
    out.push_back({rng.log_uniform_scale(1.0) * x, rng.log_uniform_scale(1.0) * y});
  }
  return out;
}

}  // namespace

TEST(RhoPair, MaxNormVertex) {
  const auto p = rho_pair(NormSpec::max_norm(2), Vector{1, 1}, Vector{0, -1});
  EXPECT_EQ(p.rho_minus, -1.0);
  EXPECT_EQ(p.rho_plus, 0.0);
  EXPECT_EQ(p.method, DerivativePair::Method::exact);
  EXPECT_EQ(p.rho_star(), 0.0);
}

TEST(RhoPair, EuclideanIsInnerProduct) {
  const auto p = rho_pair(NormSpec::lp(2, 2), Vector{1, 0}, Vector{2, 5});
  EXPECT_EQ(p.rho_minus, 2.0);
  EXPECT_EQ(p.rho_plus, 2.0);
  EXPECT_EQ(rho_mid(NormSpec::lp(2, 2), Vector{3, 4}, Vector{4, -3}), 0.0);
  EXPECT_EQ(rho_star(NormSpec::lp(2, 2), Vector{3, 4}, Vector{4, -3}), 0.0);
}

// Oracle: (||(1,t)||_1 - 1)/t is exactly 1 for t > 0 and -1 for t < 0.
TEST(RhoPair, TaxicabZeroCoordinate) {
  const auto n = NormSpec::lp(1, 2);
  const Vector x{1, 0}, y{0, 1};
  for (double t : {0.5, 0.25, 0x1p-10}) {
    EXPECT_EQ((n(x + t * y) - 1.0) / t, 1.0);
    EXPECT_EQ((n(x - t * y) - 1.0) / -t, -1.0);
  }
  const auto p = rho_pair(n, x, y);
  EXPECT_EQ(p.rho_minus, -1.0);
  EXPECT_EQ(p.rho_plus, 1.0);
}

TEST(RhoPair, ZeroFirstArgument) {
  for (const auto& n : catalogue(3)) {
    const auto p = rho_pair(n, Vector(3), Vector{1, 2, 3});
    EXPECT_EQ(p.rho_minus, 0.0);
    EXPECT_EQ(p.rho_plus, 0.0);
  }
}

TEST(RhoPair, DimensionMismatch) {
  EXPECT_THROW(rho_pair(NormSpec::lp(2, 2), Vector{1, 0, 0}, Vector{1, 0}), Error);
  EXPECT_THROW(rho_pair(NormSpec::lp(2, 2), Vector{1, 0}, Vector{1}), Error);
}

TEST(RhoLambda, MaxNormVertexGivesMinusLambda) {
  const auto n = NormSpec::max_norm(2);
  for (double l : {0.0, 0.1, 0.25, 0.5, 0.9, 1.0})
    EXPECT_DOUBLE_EQ(rho_lambda(n, Lambda(l), Vector{1, 1}, Vector{0, -1}), -l);
}

TEST(RhoLambda, CounterexampleDirectionIsOrthogonal) {
  const auto n = NormSpec::max_norm(2);
  const double l = 0.25;
  const Vector y{-1.0 / (2 * l), 1.0 / (2 * (1 - l))};
  EXPECT_EQ(y, (Vector{-2, 2.0 / 3.0}));
  EXPECT_NEAR(rho_lambda(n, Lambda(l), Vector{1, 1}, y), 0.0, 1e-15);
  EXPECT_EQ(rho_mid(n, Vector{1, 1}, Vector{1, -1}), 0.0);
}

TEST(RhoLambda, EndpointsAndSelf) {
  for (const auto& n : catalogue(3)) {
    const Vector x{0.3, -1.2, 2}, y{1, 1, -0.5};
    const auto p = rho_pair(n, x, y);
    EXPECT_EQ(rho_lambda(n, Lambda(0), x, y), p.rho_plus);
    EXPECT_EQ(rho_lambda(n, Lambda(1), x, y), p.rho_minus);
    EXPECT_EQ(rho_lambda(n, Lambda(0.5), x, y), p.rho_mid());
    const double nx = n(x);
    EXPECT_NEAR(rho_lambda(n, Lambda(0.3), x, x), nx * nx, 1e-12 * nx * nx) << n.label();
  }
}

TEST(RhoLambda, InvalidLambda) {
  EXPECT_THROW(Lambda(-0.1), Error);
  EXPECT_THROW(Lambda(1.5), Error);
  EXPECT_THROW(Lambda(std::nan("")), Error);
}

TEST(Smoothness, MaxNormVertexWitness) {
  const auto r = is_smooth_at(NormSpec::max_norm(2), Vector{1, 1});
  EXPECT_FALSE(r.smooth);
  ASSERT_TRUE(r.witness);
  EXPECT_EQ(*r.witness, (Vector{0, -1}));
  EXPECT_EQ(r.gap, 1.0);
}

TEST(Smoothness, CatalogueCases) {
  Rng rng(4);
  for (int k = 0; k < 50; ++k)
    EXPECT_TRUE(is_smooth_at(NormSpec::lp(2, 3), rng.gaussian(3)).smooth);
  EXPECT_TRUE(is_smooth_at(NormSpec::lp(1, 2), Vector{1, 1}).smooth);
  EXPECT_FALSE(is_smooth_at(NormSpec::lp(1, 2), Vector{1, 0}).smooth);
  EXPECT_TRUE(is_smooth_at(NormSpec::max_norm(2), Vector{1, 0.5}).smooth);
  EXPECT_THROW(is_smooth_at(NormSpec::lp(2, 2), Vector{0, 0}), Error);
}

TEST(Smoothness, NumericalAgreesWithStructure) {
  const auto opts = DerivativeMethod::numerical;
  const auto maxr = is_smooth_at(NormSpec::max_norm(2), Vector{1, 1}, 64, 1e-8, opts);
  EXPECT_FALSE(maxr.smooth);
  EXPECT_TRUE(is_smooth_at(NormSpec::lp(3, 2), Vector{1, 1}, 64, 1e-8, opts).smooth);
  EXPECT_TRUE(is_smooth_at(NormSpec::lp(1, 2), Vector{1, 1}, 64, 1e-8, opts).smooth);
}

TEST(Smoothness, WitnessHasPositiveGapOnEveryNonsmoothFamily) {
  for (const auto& n : catalogue(3)) {
    for (const auto& x : structured_points(n)) {
      const auto r = is_smooth_at(n, x);
      if (n.is_smooth()) {
        EXPECT_TRUE(r.smooth) << n.label();
        continue;
      }
      if (r.smooth) continue;
      const auto p = rho_pair(n, x, *r.witness);
      EXPECT_GT(p.rho_plus - p.rho_minus, 1e-9) << n.label() << " " << format_vector(x);
      EXPECT_NEAR(p.rho_plus - p.rho_minus, r.gap, 1e-12);
    }
  }
}

TEST(Gateaux, EuclideanUnitFunctional) {
  const auto f = gateaux_differential(NormSpec::lp(2, 2), Vector{0, 2});
  EXPECT_EQ(f.coefficients(), (Vector{0, 1}));
  EXPECT_EQ(f(Vector{3, 7}), 7.0);
}

TEST(Gateaux, CubicNormAgainstQuotientOracle) {
  const auto n = NormSpec::lp(3, 2);
  const Vector x{1, 1};
  const auto f = gateaux_differential(n, x);
  for (std::size_t j = 0; j < 2; ++j) {
    const Vector e = Vector::basis(2, j);
    const double central =
        0.5 * (quotient_oracle(n, x, e, 1.0) + quotient_oracle(n, x, e, -1.0)) / n(x);
    EXPECT_NEAR(f.coefficients()[j], central, 1e-8);
    EXPECT_NEAR(f.coefficients()[j], std::pow(2.0, -2.0 / 3.0), 1e-14);
  }
  EXPECT_NEAR(f(x), n(x), 1e-12);
}

TEST(Gateaux, NonsmoothPointRaises) {
  try {
    gateaux_differential(NormSpec::max_norm(2), Vector{1, 1});
    FAIL();
  } catch (const NonsmoothPointError& e) {
    EXPECT_EQ(e.code(), ErrorCode::nonsmooth_point);
    EXPECT_EQ(e.witness(), (Vector{0, -1}));
  }
}

TEST(Gateaux, UnitFunctionalNormOnSmoothNorms) {
  for (const auto& n : {NormSpec::lp(1.5, 3), NormSpec::lp(4, 3),
                        NormSpec::linear_image(Matrix{{1, 0.5, 0}, {0, 1, 0.5}, {0, 0, 1}},
                                               NormSpec::lp(3, 3))}) {
    Rng rng(21);
    for (int k = 0; k < 20; ++k) {
      const Vector x = rng.gaussian(3);
      const auto f = gateaux_differential(n, x);
      EXPECT_NEAR(f(x), n(x), 1e-10 * n(x));
      double sup = 0.0;
      for (const auto& y : sample_unit_sphere(n, 400, k)) sup = std::max(sup, f(y));
      EXPECT_LE(sup, 1.0 + 1e-10);
      EXPECT_NEAR(f(normalize(n, x)), 1.0, 1e-10);
    }
  }
}

TEST(Numerical, MatchesExactOnCatalogue) {
  for (std::size_t dim : {2, 3, 4}) {
    for (const auto& n : catalogue(dim)) {
      for (const auto& [x, y] : sampled_pairs(n, 60, 31 + dim)) {
        const Vector xu = normalize(n, x), yu = normalize(n, y);
        const auto ex = rho_pair(n, xu, yu, DerivativeMethod::exact);
        const auto nu = rho_pair(n, xu, yu, DerivativeMethod::numerical);
        EXPECT_NEAR(nu.rho_minus, ex.rho_minus, 1e-6) << n.label();
        EXPECT_NEAR(nu.rho_plus, ex.rho_plus, 1e-6) << n.label();
        EXPECT_TRUE(nu.converged) << n.label() << " r=" << nu.enclosure_radius;
        EXPECT_LE(std::abs(nu.rho_minus - ex.rho_minus), nu.enclosure_radius + 1e-12) << n.label() << format_vector(xu) << format_vector(yu);
        EXPECT_LE(std::abs(nu.rho_plus - ex.rho_plus), nu.enclosure_radius + 1e-12);
      }
    }
  }
}

TEST(Numerical, ScaleInvariantEnclosure) {
  const auto n = NormSpec::lp(3, 2);
  const Vector x{1, 2}, y{-3, 1};
  const auto base = numerical_rho_pair(n, x, y);
  const auto big = numerical_rho_pair(n, 1e6 * x, 1e-4 * y);
  EXPECT_NEAR(big.rho_plus, 1e2 * base.rho_plus, 1e-9 * std::abs(1e2 * base.rho_plus));
}

TEST(Numerical, EnclosureBracketsAreRigorous) {
  const auto n = NormSpec::lp(1, 3);
  const Vector x{1, 0, -2}, y{0.5, 1, 1};
  const auto ex = rho_pair(n, x, y, DerivativeMethod::exact);
  const double nx = n(x);
  for (double t = 0.5; t > 1e-6; t *= 0.5) {
    EXPECT_LE(nx * (n(x - t * y) - nx) / -t, ex.rho_minus + 1e-12);
    EXPECT_GE(nx * (n(x + t * y) - nx) / t, ex.rho_plus - 1e-12);
  }
}

// Properties sampled over the catalogue in dims 2..4.
class RhoProperties : public ::testing::TestWithParam<std::size_t> {};

TEST_P(RhoProperties, OrderBoundHomogeneityShiftSandwich) {
  const std::size_t dim = GetParam();
  for (const auto& n : catalogue(dim)) {
    for (const auto& [x, y] : sampled_pairs(n, 80, 7 * dim)) {
      const auto p = rho_pair(n, x, y);
      const double nx = n(x), ny = n(y), s = nx * ny;
      const double tol = 1e-10 * (s + nx * nx);
      EXPECT_LE(p.rho_minus, p.rho_plus + tol);
      for (double l : {0.0, 0.3, 0.5, 1.0}) {
        const Lambda lam(l);
        const double r = p.rho_lambda(lam);
        EXPECT_LE(std::abs(r), s + tol);
        for (double t : {2.0, 0.5, 1.0}) {
          EXPECT_NEAR(rho_lambda(n, lam, t * x, y), t * r, 1e-10 * t * (s + nx * nx));
          EXPECT_NEAR(rho_lambda(n, lam, x, t * y), t * r, 1e-10 * t * (s + nx * nx));
          EXPECT_NEAR(rho_lambda(n, lam, -t * x, y), -t * p.rho_lambda(lam.complement()),
                      1e-10 * t * (s + nx * nx));
          EXPECT_NEAR(rho_lambda(n, lam, x, -t * y), -t * p.rho_lambda(lam.complement()),
                      1e-10 * t * (s + nx * nx));
        }
        for (double t : {-1.7, -0.25, 0.6, 3.0}) {
          const double shifted = rho_lambda(n, lam, x, t * x + y);
          EXPECT_NEAR(shifted, t * nx * nx + r, 1e-9 * (s + std::abs(t) * nx * nx)) << n.label();
        }
        EXPECT_GE(r, (nx - n(x - y)) * nx - tol) << n.label();
        EXPECT_LE(r, (n(x + y) - nx) * nx + tol) << n.label();
        const Vector xu = x / nx, yu = y / ny;
        EXPECT_GE(r, (1 - n(xu - yu)) * s - tol) << n.label();
        EXPECT_LE(r, (n(xu + yu) - 1) * s + tol) << n.label();
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Dims, RhoProperties, ::testing::Values(2, 3, 4));
