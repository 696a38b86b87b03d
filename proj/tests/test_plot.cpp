#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "rholab/plot.hpp"

using namespace rholab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool has_crossing_near(const PlotData& d, double deg, double tol = 1e-6) {
  for (double c : d.zero_crossings)
    if (std::abs(c - deg) <= tol) return true;
  return false;
}

}  // namespace

TEST(Plot, MaxNormBallIsTheSquare) {
  PlotOptions o;
  o.resolution = 64;
  const auto d = plot_data(NormSpec::max_norm(2), o);
  ASSERT_EQ(d.samples.size(), 64u);
  double max_x = 0, max_y = 0;
  for (const auto& s : d.samples) {
    EXPECT_NEAR(std::max(std::abs(s.point[0]), std::abs(s.point[1])), 1.0, 1e-12);
    max_x = std::max(max_x, s.point[0]);
    max_y = std::max(max_y, s.point[1]);
  }
  // 45 degrees is on the grid, so the vertex (1,1) is sampled
  bool vertex = false;
  for (const auto& s : d.samples)
    vertex = vertex || (std::abs(s.point[0] - 1) < 1e-12 && std::abs(s.point[1] - 1) < 1e-12);
  EXPECT_TRUE(vertex);
}

TEST(Plot, EuclideanFieldCrossesAtRightAngles) {
  PlotOptions o;
  o.kind = PlotKind::orthogonality_field;
  o.x = Vector{1, 0};
  for (double l : {0.0, 0.3, 1.0}) {
    o.lambda = Lambda(l);
    o.resolution = 100;  // +-90 degrees are not grid points
    const auto d = plot_data(NormSpec::lp(2, 2), o);
    ASSERT_EQ(d.zero_crossings.size(), 2u);
    EXPECT_TRUE(has_crossing_near(d, 90.0, 1e-9));
    EXPECT_TRUE(has_crossing_near(d, -90.0, 1e-9));
  }
}

TEST(Plot, MaxNormFieldVanishesOnAntiDiagonal) {
  PlotOptions o;
  o.kind = PlotKind::orthogonality_field;
  o.x = Vector{1, 1};
  o.lambda = Lambda(0.5);
  o.resolution = 90;
  const auto d = plot_data(NormSpec::max_norm(2), o);
  // rho((1,1), y) = (y1 + y2)/2 on this norm
  EXPECT_TRUE(has_crossing_near(d, -45.0, 1e-9));
  EXPECT_TRUE(has_crossing_near(d, 135.0, 1e-9));
  const double r = rho_pair(NormSpec::max_norm(2), Vector{1, 1}, Vector{1, -1}).rho_mid();
  EXPECT_EQ(r, 0.0);
}

TEST(Plot, WritesSvgAndCsv) {
  const auto dir = std::filesystem::temp_directory_path() / "rholab_plot_test";
  std::filesystem::create_directories(dir);
  PlotOptions o;
  o.kind = PlotKind::orthogonality_field;
  o.x = Vector{1, 0};
  const auto f = plot(NormSpec::lp(3, 2), o, dir / "field.svg");
  const std::string svg = slurp(f.svg);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  const std::string csv = slurp(f.csv);
  EXPECT_EQ(csv.rfind("theta_deg,y1,y2,rho_lambda\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 361);
  std::filesystem::remove_all(dir);
}

TEST(Plot, Errors) {
  PlotOptions o;
  EXPECT_THROW(plot_data(NormSpec::lp(2, 3), o), Error);
  o.resolution = 16;
  EXPECT_THROW(plot_data(NormSpec::lp(2, 2), o), Error);
  o.resolution = 64;
  o.kind = PlotKind::orthogonality_field;
  EXPECT_THROW(plot_data(NormSpec::lp(2, 2), o), Error);
  o.x = Vector{0, 0};
  EXPECT_THROW(plot_data(NormSpec::lp(2, 2), o), Error);
  o.kind = PlotKind::unit_ball;
  try {
    plot(NormSpec::lp(2, 2), o, "/nonexistent-dir/x/ball.svg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io_error);
  }
  EXPECT_THROW(parse_plot_kind("surface"), Error);
}
