#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "rholab/harness.hpp"

using namespace rholab;

namespace {

SuiteConfig small_config(std::vector<Suite> suites, std::size_t trials = 200) {
  SuiteConfig c;
  c.norms = fixtures::norms(std::size_t{2});
  c.trials = trials;
  c.suites = std::move(suites);
  return c;
}

const CheckRecord& find(const SuiteReport& r, const std::string& id) {
  for (const auto& rec : r.records)
    if (rec.check_id == id) return rec;
  throw std::runtime_error("missing record " + id);
}

std::string config_error_text(const std::string& text) {
  try {
    config_from_json(json::parse(text));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_error);
    return e.what();
  }
  ADD_FAILURE() << "no error for " << text;
  return "";
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const auto d = config_from_json(json::object());
  EXPECT_EQ(d.norms.size(), 21u);
  EXPECT_EQ(d.lambdas.size(), 5u);
  EXPECT_EQ(d.trials, 10000u);
  EXPECT_EQ(d.seed, 42u);
  EXPECT_EQ(d.suites.size(), 7u);

  const auto c = config_from_json(json::parse(R"({
    "norms": [{"family": "lp", "dim": 2, "p": "inf"}, {"family": "lp", "dim": 3, "p": 2}],
    "lambdas": ["1/4", 0.5], "trials": 7, "seed": 9, "tol": 1e-9,
    "suites": ["examples", "inclusions"]})"));
  EXPECT_EQ(c.norms.size(), 2u);
  EXPECT_EQ(c.lambdas, (std::vector<double>{0.25, 0.5}));
  EXPECT_EQ(c.trials, 7u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.suites, (std::vector<Suite>{Suite::examples, Suite::inclusions}));

  EXPECT_EQ(config_from_json(json::parse(R"({"dims": [2]})")).norms.size(), 7u);
}

TEST(Config, ErrorsCarryLocation) {
  EXPECT_NE(config_error_text(R"({"trials": 0})").find("/trials"), std::string::npos);
  EXPECT_NE(config_error_text(R"({"tol": 0})").find("/tol"), std::string::npos);
  EXPECT_NE(config_error_text(R"({"suites": []})").find("/suites"), std::string::npos);
  EXPECT_NE(config_error_text(R"({"suites": ["properties", "bogus"]})").find("/suites/1"),
            std::string::npos);
  EXPECT_NE(config_error_text(R"({"lambdas": [0.5, 2]})").find("/lambdas/1"), std::string::npos);
  EXPECT_NE(config_error_text(R"({"norms": [{"family": "lp", "dim": 2, "p": 2}, {"family": "lp", "dim": 2, "p": 0.5}]})")
                .find("/norms/1"),
            std::string::npos);
  EXPECT_NE(config_error_text(R"({"trails": 5})").find("/trails"), std::string::npos);
  EXPECT_NE(config_error_text(R"({"method": "fast"})").find("/method"), std::string::npos);
  SuiteConfig c;
  c.trials = 0;
  EXPECT_THROW(run_suite(c), Error);
}

TEST(ReferenceExamples, ReproducedExactly) {
  SuiteConfig c = small_config({Suite::examples});
  c.lambdas = {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0};
  const auto rep = run_suite(c);
  EXPECT_EQ(rep.exit_code(), 0);
  for (const auto& r : rep.records) {
    if (r.status == CheckStatus::vacuous) {
      EXPECT_NE(r.check_id.find("lambda_pair"), std::string::npos) << r.check_id;
      continue;
    }
    EXPECT_EQ(r.status, CheckStatus::pass) << r.check_id;
    // y = (-1/(2l), 1/(2(1-l))) is itself rounded, other rows are exact
    if (r.check_id.find("lambda_pair") != std::string::npos)
      EXPECT_LE(r.residual, 1e-12) << r.check_id;
    else
      EXPECT_EQ(r.residual, 0.0) << r.check_id;
  }
  EXPECT_EQ(find(rep, "examples/lambda_pair/lambda=0").status, CheckStatus::vacuous);
  EXPECT_EQ(find(rep, "examples/lambda_pair/lambda=1").status, CheckStatus::vacuous);
}

TEST(ReferenceExamples, TableValues) {
  auto row = [](double l, const std::string& id) {
    for (const auto& r : reference_examples(Lambda(l)))
      if (r.id == id) return r;
    throw std::runtime_error(id);
  };
  EXPECT_EQ(row(0.25, "z_v").computed.rho_lambda(Lambda(0.25)), 0.5);
  EXPECT_EQ(row(0.5, "lambda_pair").computed.rho_mid(), 0.0);
  const auto p = row(0.1, "lambda_pair").computed;
  EXPECT_DOUBLE_EQ(p.rho_minus, -5.0);
  EXPECT_DOUBLE_EQ(p.rho_plus, 5.0 / 9.0);
  EXPECT_NEAR(p.rho_lambda(Lambda(0.1)), 0.0, 1e-15);
  const auto v = row(0.3, "vertex");
  EXPECT_TRUE(v.birkhoff);
  EXPECT_FALSE(v.rho_lambda_orthogonal);
  EXPECT_EQ(v.computed.rho_minus, -1.0);
  EXPECT_EQ(v.computed.rho_plus, 0.0);
  const auto table = format_examples(reference_examples(Lambda(0.25)));
  EXPECT_NE(table.find("-1/2"), std::string::npos);
  EXPECT_NE(format_examples(reference_examples(Lambda(1.0))).find("undefined"), std::string::npos);
}

TEST(Search, StructuredWitnessOnMaxNorm) {
  const auto s = search_counterexample(Relation::birkhoff(), Relation::rho_lambda(Lambda(0.5)),
                                       NormSpec::max_norm(2), 100, 1);
  ASSERT_TRUE(s.found);
  EXPECT_TRUE(s.structured_hit);
  EXPECT_LE(s.probes, 100u);
  const auto& [x, y] = *s.witness;
  const auto n = NormSpec::max_norm(2);
  EXPECT_TRUE(check(Relation::birkhoff(), n, x, y).orthogonal);
  EXPECT_FALSE(check(Relation::rho_lambda(Lambda(0.5)), n, x, y).orthogonal);
  EXPECT_EQ(s.witness_text().find('.'), std::string::npos) << s.witness_text();
}

TEST(Search, ExhaustedWhereInclusionHolds) {
  for (const auto& n : fixtures::norms(std::size_t{2})) {
    const auto s = search_counterexample(Relation::rho_lambda(Lambda(0.5)), Relation::birkhoff(), n, 500, 3);
    EXPECT_FALSE(s.found) << n.label();
    EXPECT_EQ(s.probes, 500u) << n.label();
    EXPECT_EQ(s.witness_text(), "exhausted");
  }
  EXPECT_THROW(search_counterexample(Relation::birkhoff(), Relation::rho_mid(), NormSpec::lp(2, 2), 0, 1),
               Error);
}

TEST(Search, RhoMinusAgainstRhoLambda) {
  const auto n = NormSpec::max_norm(2);
  const auto s = search_counterexample(Relation::rho_minus(), Relation::rho_lambda(Lambda(0.3)), n, 1000, 5);
  ASSERT_TRUE(s.found);
  const auto& [x, y] = *s.witness;
  const auto p = rho_pair(n, x, y);
  EXPECT_EQ(p.rho_minus, 0.0);
  EXPECT_GT(std::abs(p.rho_lambda(Lambda(0.3))), 1e-8 * eval_norm(n, x) * eval_norm(n, y));
}

TEST(Suites, SmallRunPassesAndWitnessesRecompute) {
  SuiteConfig c = small_config(all_suites(), 150);
  c.norms = {NormSpec::lp(2, 2), NormSpec::max_norm(2), fixtures::hexagon(2), NormSpec::lp(3, 2)};
  c.lambdas = {0.0, 0.5, 0.75};
  const auto rep = run_suite(c);
  std::size_t with_witness = 0;
  for (const auto& r : rep.records) EXPECT_NE(r.status, CheckStatus::fail) << r.check_id << " " << r.detail;
  EXPECT_EQ(rep.exit_code(), 0);
  const json j = report_to_json(rep, false);
  for (const auto& r : j["records"]) {
    if (!r.contains("witness")) continue;
    ++with_witness;
    const auto v = recompute_residual(r);
    ASSERT_TRUE(v.has_value());
    EXPECT_NEAR(*v, r["residual"].get<double>(), 1e-12) << r["check_id"];
  }
  EXPECT_GT(with_witness, 50u);
  // nonsmooth norms must produce witnesses in the smoothness suite
  const auto& w = find(rep, "smoothness/" + NormSpec::max_norm(2).label() + "/birkhoff in rho_lambda(1/2)");
  EXPECT_EQ(w.status, CheckStatus::pass);
  EXPECT_EQ(w.witness.size(), 2u);
  const auto& s = find(rep, "smoothness/" + NormSpec::lp(2, 2).label() + "/birkhoff in rho_lambda(1/2)");
  EXPECT_TRUE(s.witness.empty());
}

TEST(Suites, SummaryCountsMatchRecords) {
  const auto rep = run_suite(small_config({Suite::examples, Suite::inclusions}, 50));
  const json j = report_to_json(rep);
  std::size_t sum = 0;
  for (const char* k : {"pass", "vacuous", "degenerate", "numerical_failure", "fail"})
    sum += j["summary"][k].get<std::size_t>();
  EXPECT_EQ(sum, j["records"].size());
  EXPECT_EQ(j["summary"]["total"].get<std::size_t>(), rep.records.size());
  const auto table = render_table(j);
  EXPECT_NE(table.find("total " + std::to_string(rep.records.size())), std::string::npos);
}

TEST(Suites, DeterministicAcrossThreadCounts) {
  SuiteConfig c = small_config({Suite::properties, Suite::smoothness, Suite::characterization,
                                Suite::mappings},
                               60);
  c.threads = 1;
  const auto a = report_to_json(run_suite(c), false).dump();
  c.threads = 4;
  const auto b = report_to_json(run_suite(c), false).dump();
  EXPECT_EQ(a, b);
  c.seed = 43;
  EXPECT_NE(report_to_json(run_suite(c), false).dump(), a);
}

TEST(Suites, ExitCodesFollowWorstRecord) {
  SuiteReport r;
  r.records.resize(3);
  r.records[1].status = CheckStatus::vacuous;
  r.records[2].status = CheckStatus::degenerate;
  EXPECT_EQ(r.exit_code(), 0);
  r.records[2].status = CheckStatus::numerical_failure;
  EXPECT_EQ(r.exit_code(), 3);
  r.records[0].status = CheckStatus::fail;
  EXPECT_EQ(r.exit_code(), 1);
}

TEST(Suites, NumericalMethodOnSmoothNorm) {
  SuiteConfig c = small_config({Suite::properties, Suite::examples}, 100);
  c.norms = {NormSpec::lp(2, 2), NormSpec::lp(3, 3)};
  c.method = DerivativeMethod::numerical;
  const auto rep = run_suite(c);
  for (const auto& r : rep.records)
    EXPECT_TRUE(r.status == CheckStatus::pass || r.status == CheckStatus::vacuous)
        << r.check_id << " " << r.detail << " " << r.residual;
}

TEST(Suites, PropertySlackDetectsBrokenIdentity) {
  // the slack is the worst normalized violation; an exact pair has none
  const auto n = NormSpec::max_norm(2);
  EXPECT_GE(detail::property_slack(n, Lambda(0.5), Vector{1, 1}, Vector{0, -1}, DerivativeMethod::exact),
            -1e-15);
  EXPECT_GE(detail::property_slack(NormSpec::lp(1, 3), Lambda(0.2), Vector{1, 0, -2}, Vector{3, 1, 1},
                                   DerivativeMethod::exact),
            -1e-15);
}
