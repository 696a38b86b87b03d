#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "rholab/mappings.hpp"

using namespace rholab;

namespace {

// max ||A (cos b, sin b)||_2 by a fine angular scan.
double circle_oracle_norm(const Matrix& a) {
  double best = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double b = std::numbers::pi * k / n;
    const Vector u{std::cos(b), std::sin(b)};
    const Vector v = a * u;
    best = std::max(best, std::hypot(v[0], v[1]));
  }
  return best;
}

// Induced l_inf -> l_inf norm: the largest absolute row sum.
double max_row_sum(const Matrix& a) {
  double best = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) s += std::abs(a(r, c));
    best = std::max(best, s);
  }
  return best;
}

struct MapCase {
  LinearMap map;
  bool is_similarity;
};

std::vector<MapCase> map_cases() {
  const auto l2 = NormSpec::lp(2, 2);
  const auto linf3 = NormSpec::max_norm(3);
  return {
      {LinearMap(Matrix::plane_rotation(2, 0.7), l2), true},
      {LinearMap(3.0 * Matrix::permutation({2, 0, 1}), linf3), true},
      {LinearMap(2.0 * Matrix::identity(3), NormSpec::lp(3, 3)), true},
      {LinearMap(Matrix::diagonal(std::vector<double>{1, 2}), l2), false},
      {LinearMap(Matrix::from_rows({{1, 1}, {0, 1}}), l2), false},
  };
}

}  // namespace

TEST(LinearMap, DimensionValidation) {
  EXPECT_THROW(LinearMap(Matrix::identity(3), NormSpec::lp(2, 2)), Error);
  try {
    LinearMap(Matrix::identity(2), NormSpec::lp(2, 2), NormSpec::lp(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::dimension_mismatch);
  }
  EXPECT_NO_THROW(LinearMap(Matrix::from_rows({{1, 2}}), NormSpec::lp(1, 2), NormSpec::lp(2, 1)));
}

TEST(LinearMap, JsonRoundTripAndErrors) {
  const LinearMap t(Matrix::from_rows({{1, 2}, {0, 1}}), NormSpec::lp(1, 2), NormSpec::max_norm(2));
  const auto back = map_from_json(map_to_json(t));
  EXPECT_EQ(back.matrix(), t.matrix());
  EXPECT_EQ(back.domain(), t.domain());
  EXPECT_EQ(back.codomain(), t.codomain());

  const auto j = json::parse(R"({"matrix": [["1/2", 0], [0, 1]], "domain": {"family": "lp", "p": 2}})");
  const auto m = map_from_json(j);
  EXPECT_EQ(m.matrix()(0, 0), 0.5);
  EXPECT_EQ(m.codomain(), m.domain());

  try {
    map_from_json(json::parse(R"({"matrix": [[1, 0]], "domain": {"family": "lp", "p": 2}})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_error);
  }
  try {
    map_from_json(json::parse(R"({"domain": {"family": "lp", "p": 2}})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_error);
    EXPECT_NE(std::string(e.what()).find("matrix"), std::string::npos);
  }
}

TEST(OperatorNorm, IdentityAndDiagonal) {
  const auto l2 = NormSpec::lp(2, 2);
  EXPECT_NEAR(operator_norm(LinearMap(Matrix::identity(2), l2)).value, 1.0, 1e-12);
  const Matrix d = Matrix::diagonal(std::vector<double>{2, 3});
  const auto est = operator_norm(LinearMap(d, l2));
  EXPECT_NEAR(est.value, circle_oracle_norm(d), 1e-9);
  EXPECT_NEAR(est.value, 3.0, 1e-12);
  EXPECT_FALSE(est.is_exact);
  EXPECT_NEAR(eval_norm(l2, est.witness), 1.0, 1e-12);
}

TEST(OperatorNorm, RotatedShearMatchesCircleScan) {
  const Matrix a = Matrix::from_rows({{1, 1}, {0, 1}}) * Matrix::plane_rotation(2, 0.3);
  const auto est = operator_norm(LinearMap(a, NormSpec::lp(2, 2)));
  // golden ratio is the largest singular value of the shear
  EXPECT_NEAR(circle_oracle_norm(a), std::numbers::phi, 1e-9);
  EXPECT_NEAR(est.value, std::numbers::phi, 1e-8);
}

TEST(OperatorNorm, ExactForL1Domain) {
  const LinearMap t(Matrix::from_rows({{1, 2}, {0, 1}}), NormSpec::lp(1, 2), NormSpec::max_norm(2));
  const auto est = operator_norm(t);
  EXPECT_TRUE(est.is_exact);
  EXPECT_DOUBLE_EQ(est.value, 2.0);
  EXPECT_EQ(est.witness, Vector::basis(2, 1));
}

TEST(OperatorNorm, MaxNormMatchesRowSums) {
  Rng rng(7);
  for (int k = 0; k < 10; ++k) {
    std::vector<std::vector<double>> rows(3, std::vector<double>(3));
    for (auto& r : rows)
      for (auto& v : r) v = rng.normal();
    const Matrix a = Matrix::from_rows(rows);
    const auto est = operator_norm(LinearMap(a, NormSpec::max_norm(3)));
    EXPECT_NEAR(est.value, max_row_sum(a), 1e-9 * max_row_sum(a));
  }
}

TEST(OperatorNorm, ZeroMap) {
  const auto est = operator_norm(LinearMap(Matrix(2, 2), NormSpec::lp(2, 2)));
  EXPECT_TRUE(est.zero_map);
  EXPECT_EQ(est.value, 0.0);
}

TEST(Similarity, RotationAndDiagonal) {
  const auto l2 = NormSpec::lp(2, 2);
  const auto rot = similarity_defect(LinearMap(Matrix::plane_rotation(2, 1.1), l2));
  EXPECT_LE(rot.defect(), 1e-9);
  EXPECT_TRUE(rot.is_similarity());

  const auto diag = similarity_defect(LinearMap(Matrix::diagonal(std::vector<double>{1, 2}), l2));
  EXPECT_NEAR(diag.ratio_max, 2.0, 1e-12);
  EXPECT_NEAR(diag.ratio_min, 1.0, 1e-12);
  EXPECT_FALSE(diag.is_similarity());

  const auto perm =
      similarity_defect(LinearMap(3.0 * Matrix::permutation({1, 2, 0}), NormSpec::max_norm(3)));
  EXPECT_NEAR(perm.ratio_max, 3.0, 1e-12);
  EXPECT_NEAR(perm.ratio_min, 3.0, 1e-12);
}

TEST(Similarity, RankDeficientIsDegenerate) {
  const LinearMap t(Matrix::from_rows({{1, 0}, {0, 0}}), NormSpec::lp(2, 2));
  EXPECT_TRUE(similarity_defect(t).degenerate);
  EXPECT_EQ(preserves_rho_lambda(t, Lambda(0.5), 100, 1).status,
            PreservationResult::Status::degenerate);
  EXPECT_TRUE(scaling_identity_residual(t, Lambda(0.5), 100, 1).degenerate);
}

TEST(Preservation, SimilaritiesPreserveAndOthersBreak) {
  const auto rot = LinearMap(Matrix::plane_rotation(2, 0.7), NormSpec::lp(2, 2));
  const auto ok = preserves_rho_lambda(rot, Lambda(0.3), 500, 3);
  EXPECT_EQ(ok.status, PreservationResult::Status::pass);
  EXPECT_EQ(ok.trials, 500u);

  const auto diag = LinearMap(Matrix::diagonal(std::vector<double>{1, 2}), NormSpec::lp(2, 2));
  const auto bad = preserves_rho_lambda(diag, Lambda(0.3), 500, 3);
  ASSERT_EQ(bad.status, PreservationResult::Status::witness);
  ASSERT_TRUE(bad.witness.has_value());
  const auto& [x, z] = *bad.witness;
  // x ⊥ z in the domain, not after mapping
  EXPECT_LE(std::abs(rho_pair(diag.domain(), x, z).rho_lambda(Lambda(0.3))),
            1e-8 * eval_norm(diag.domain(), x) * eval_norm(diag.domain(), z));
  const Vector tx = diag(x), tz = diag(z);
  EXPECT_GT(std::abs(rho_pair(diag.codomain(), tx, tz).rho_lambda(Lambda(0.3))),
            1e-8 * eval_norm(diag.codomain(), tx) * eval_norm(diag.codomain(), tz));
  EXPECT_THROW(preserves_rho_lambda(diag, Lambda(0.3), 0, 3), Error);
}

TEST(Scaling, SimilarityScalesRhoBySquaredNorm) {
  const LinearMap t(3.0 * Matrix::permutation({2, 0, 1}), NormSpec::max_norm(3));
  const auto r = scaling_identity_residual(t, Lambda(0.25), 500, 11);
  EXPECT_NEAR(r.op_norm, 3.0, 1e-12);
  EXPECT_LE(r.max_residual, 1e-6);

  const LinearMap d(Matrix::diagonal(std::vector<double>{1, 2}), NormSpec::lp(2, 2));
  // x = (1,0), y = (1,1): rho(Tx,Ty) = 1 but ||T||^2 rho(x,y) = 4
  const double lhs = rho_pair(d.codomain(), d(Vector{1, 0}), d(Vector{1, 1})).rho_mid();
  const double rhs = 4.0 * rho_pair(d.domain(), Vector{1, 0}, Vector{1, 1}).rho_mid();
  EXPECT_NEAR(lhs, 1.0, 1e-12);
  EXPECT_NEAR(rhs, 4.0, 1e-12);
  EXPECT_GT(scaling_identity_residual(d, Lambda(0.5), 500, 11).max_residual, 0.1);
}

TEST(Mappings, ThreeConditionsAgree) {
  for (const auto& c : map_cases()) {
    const auto sim = similarity_defect(c.map);
    const auto pres = preserves_rho_lambda(c.map, Lambda(0.4), 1000, 5);
    const auto scal = scaling_identity_residual(c.map, Lambda(0.4), 1000, 5);
    const bool p = pres.status == PreservationResult::Status::pass;
    const bool s = scal.max_residual <= 1e-6;
    EXPECT_EQ(sim.is_similarity(), c.is_similarity) << c.map.domain().label();
    EXPECT_EQ(p, c.is_similarity) << c.map.domain().label();
    EXPECT_EQ(s, c.is_similarity) << c.map.domain().label();
  }
}

TEST(RhoRatio, ScaledEuclideanGivesSquaredFactor) {
  const auto l2 = NormSpec::lp(2, 3);
  const auto doubled = NormSpec::weighted_lp(2, {4, 4, 4});
  const auto r = two_norm_rho_ratio(l2, doubled, Lambda(0.5), 2000, 9);
  EXPECT_GT(r.pairs_used, 100u);
  EXPECT_NEAR(r.m_hat, 4.0, 1e-9);
  EXPECT_NEAR(r.M_hat, 4.0, 1e-9);
  EXPECT_FALSE(r.breaking.has_value());
}

TEST(RhoRatio, RotatedEuclideanIsIsometric) {
  const auto l2 = NormSpec::lp(2, 2);
  const auto rotated = NormSpec::linear_image(Matrix::plane_rotation(2, 0.9), l2);
  const auto r = two_norm_rho_ratio(l2, rotated, Lambda(0.7), 2000, 9);
  EXPECT_NEAR(r.m_hat, 1.0, 1e-9);
  EXPECT_NEAR(r.M_hat, 1.0, 1e-9);
  EXPECT_FALSE(r.breaking.has_value());
}

TEST(RhoRatio, EuclideanVersusMaxNormBreaks) {
  const auto r = two_norm_rho_ratio(NormSpec::lp(2, 2), NormSpec::max_norm(2), Lambda(0.5), 2000, 9);
  ASSERT_TRUE(r.breaking.has_value());
  EXPECT_GT(r.breaking_residual, 1e-8);
  // pairs orthogonal in one norm only rule out any two-sided ratio bound
  EXPECT_GT(r.spread(), 1.5);
  EXPECT_THROW(two_norm_rho_ratio(NormSpec::lp(2, 2), NormSpec::lp(2, 3), Lambda(0.5), 10, 1),
               Error);
}

TEST(OperatorNorm, L1DomainExactAgreesWithSampling) {
  const LinearMap t(Matrix::from_rows({{1, 2}, {0, 1}}), NormSpec::lp(1, 2), NormSpec::max_norm(2));
  double sampled = 0.0;
  for (const auto& u : sample_unit_sphere(t.domain(), 20000, 4))
    sampled = std::max(sampled, eval_norm(t.codomain(), t(u)));
  const auto est = operator_norm(t);
  EXPECT_LE(sampled, est.value + 1e-9);
  EXPECT_GT(sampled, est.value - 1e-2);
}

TEST(Similarity, ThirtyDegreeRotationAndSimilarityRatios) {
  const LinearMap rot(Matrix::plane_rotation(2, std::numbers::pi / 6), NormSpec::lp(2, 2));
  EXPECT_LE(similarity_defect(rot).defect(), 1e-9);
  for (const auto& c : map_cases()) {
    if (!c.is_similarity) continue;
    const double gamma = operator_norm(c.map).value;
    for (const auto& u : sample_unit_sphere(c.map.domain(), 500, 2)) {
      const double v = eval_norm(c.map.codomain(), c.map(u));
      EXPECT_NEAR(v, gamma * eval_norm(c.map.domain(), u), 1e-9 * gamma);
    }
  }
}

TEST(Preservation, DiagonalWitnessByInnerProduct) {
  // <Tx, Tz> for x = (1,1), z = (1,-1) under diag(1,2)
  const Vector x{1, 1}, z{1, -1};
  const Matrix d = Matrix::diagonal(std::vector<double>{1, 2});
  EXPECT_EQ(dot(d * x, d * z), -3.0);
  const auto l2 = NormSpec::lp(2, 2);
  EXPECT_EQ(rho_pair(l2, x, z).rho_mid(), 0.0);
  EXPECT_NEAR(rho_pair(l2, d * x, d * z).rho_mid(), -3.0, 1e-12);
}

TEST(Preservation, ScaledIdentityOnMaxNorm) {
  const LinearMap t(3.0 * Matrix::identity(3), NormSpec::max_norm(3));
  for (double l : {0.0, 0.25, 0.5, 0.75, 1.0})
    EXPECT_EQ(preserves_rho_lambda(t, Lambda(l), 2000, 8).status, PreservationResult::Status::pass);
  const LinearMap rot(Matrix::plane_rotation(2, 0.4), NormSpec::lp(2, 2));
  EXPECT_EQ(preserves_rho_lambda(rot, Lambda(0.5), 10000, 8).status,
            PreservationResult::Status::pass);
}

TEST(Scaling, RotationAndPermutationExamples) {
  const LinearMap rot(2.0 * Matrix::plane_rotation(2, 0.4), NormSpec::lp(2, 2));
  const auto r = scaling_identity_residual(rot, Lambda(0.5), 1000, 3);
  EXPECT_NEAR(r.op_norm, 2.0, 1e-12);
  EXPECT_LE(r.max_residual, 1e-8);
  const LinearMap perm(Matrix::permutation({1, 2, 0}), NormSpec::lp(1, 3));
  const auto p = scaling_identity_residual(perm, Lambda(0.3), 1000, 3);
  EXPECT_DOUBLE_EQ(p.op_norm, 1.0);
  EXPECT_LE(p.max_residual, 1e-8);
}
