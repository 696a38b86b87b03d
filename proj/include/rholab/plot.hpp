#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rholab/derivatives.hpp"
#include "rholab/error.hpp"
#include "rholab/norm.hpp"

namespace rholab {

enum class PlotKind { unit_ball, orthogonality_field };

inline PlotKind parse_plot_kind(const std::string& s) {
  if (s == "unit_ball") return PlotKind::unit_ball;
  if (s == "orthogonality_field") return PlotKind::orthogonality_field;
  throw Error(ErrorCode::invalid_argument, "unknown plot kind '" + s + "'");
}

struct PlotOptions {
  PlotKind kind = PlotKind::unit_ball;
  std::optional<Vector> x;       // base point of the orthogonality field
  std::optional<Lambda> lambda;  // defaults to 1/2
  std::size_t resolution = 360;
};

struct PlotSample {
  double theta = 0.0;  // degrees in (-180, 180]
  Vector point;
  double value = 0.0;  // rho_l(x, y(theta)) for the field; 0 for the ball
};

struct PlotData {
  std::vector<PlotSample> samples;
  std::vector<double> zero_crossings;  // degrees, field only
};

namespace detail {

inline double wrap_degrees(double deg) {
  while (deg > 180.0) deg -= 360.0;
  while (deg <= -180.0) deg += 360.0;
  return deg;
}

inline Vector circle(double theta_rad) { return Vector{std::cos(theta_rad), std::sin(theta_rad)}; }

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

/// Samples for a planar plot. unit_ball: boundary points u/||u|| over a
/// uniform angle grid. orthogonality_field: rho_l(x, y) for y on the
/// Euclidean unit circle, with sign changes refined by bisection.
inline PlotData plot_data(const NormSpec& spec, const PlotOptions& opt) {
  if (spec.dim() != 2)
    throw Error(ErrorCode::invalid_argument,
                "plots need a planar norm, got dimension " + std::to_string(spec.dim()));
  if (opt.resolution < 32) throw Error(ErrorCode::invalid_argument, "resolution must be >= 32");
  PlotData out;
  const std::size_t n = opt.resolution;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n);

  if (opt.kind == PlotKind::unit_ball) {
    for (std::size_t k = 0; k < n; ++k) {
      const double th = -std::numbers::pi + step * static_cast<double>(k + 1);
      out.samples.push_back({detail::wrap_degrees(th * 180.0 / std::numbers::pi),
                             normalize(spec, detail::circle(th)), 0.0});
    }
    return out;
  }

  if (!opt.x || opt.x->is_zero())
    throw Error(ErrorCode::invalid_argument, "orthogonality_field needs a nonzero x");
  require_dim(spec, *opt.x);
  const Lambda l = opt.lambda.value_or(Lambda(0.5));
  const Vector x = *opt.x;
  auto f = [&](double th) { return rho_pair(spec, x, detail::circle(th)).rho_lambda(l); };

  std::vector<double> th(n + 1), v(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    th[k] = -std::numbers::pi + step * static_cast<double>(k);
    v[k] = f(th[k]);
  }
  for (std::size_t k = 1; k <= n; ++k)
    out.samples.push_back(
        {detail::wrap_degrees(th[k] * 180.0 / std::numbers::pi), detail::circle(th[k]), v[k]});

  // crossings in [th[k-1], th[k]): an exact zero at the left end or a strict
  // sign change inside; runs of exact zeros report their first point
  const double scale = eval_norm(spec, x);
  auto is_zero = [&](double val) { return std::abs(val) <= 1e-12 * scale; };
  for (std::size_t k = 1; k <= n; ++k) {
    const double a = v[k - 1], b = v[k];
    if (is_zero(a)) {
      const bool prev_zero = k >= 2 ? is_zero(v[k - 2]) : is_zero(v[n - 1]);
      if (!prev_zero) out.zero_crossings.push_back(detail::wrap_degrees(th[k - 1] * 180.0 / std::numbers::pi));
      continue;
    }
    if (is_zero(b) || (a < 0) == (b < 0)) continue;
    double lo = th[k - 1], hi = th[k], flo = a;
    for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi), fm = f(mid);
      if (is_zero(fm)) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0) == (flo < 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    out.zero_crossings.push_back(detail::wrap_degrees(0.5 * (lo + hi) * 180.0 / std::numbers::pi));
  }
  return out;
}

inline std::string plot_csv(const PlotData& d, PlotKind kind) {
  std::ostringstream os;
  os << (kind == PlotKind::unit_ball ? "theta_deg,x,y\n" : "theta_deg,y1,y2,rho_lambda\n");
  for (const auto& s : d.samples) {
    os << detail::num(s.theta) << "," << detail::num(s.point[0]) << "," << detail::num(s.point[1]);
    if (kind == PlotKind::orthogonality_field) os << "," << detail::num(s.value);
    os << "\n";
  }
  return os.str();
}

inline std::string plot_svg(const NormSpec& spec, const PlotData& d, const PlotOptions& opt) {
  const double size = 400.0, half = size / 2.0;
  double extent = 1.0;
  for (const auto& s : d.samples) extent = std::max({extent, std::abs(s.point[0]), std::abs(s.point[1])});
  const double k = 0.85 * half / extent;
  auto px = [&](double v) { return detail::num(half + k * v); };
  auto py = [&](double v) { return detail::num(half - k * v); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
     << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
  os << "<title>" << spec.label() << "</title>\n";
  os << "<line x1=\"0\" y1=\"" << half << "\" x2=\"" << size << "\" y2=\"" << half
     << "\" stroke=\"#bbb\"/>\n<line x1=\"" << half << "\" y1=\"0\" x2=\"" << half << "\" y2=\""
     << size << "\" stroke=\"#bbb\"/>\n";

  if (opt.kind == PlotKind::unit_ball) {
    os << "<polygon fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\" points=\"";
    for (const auto& s : d.samples) os << px(s.point[0]) << "," << py(s.point[1]) << " ";
    os << "\"/>\n";
  } else {
    double vmax = 0.0;
    for (const auto& s : d.samples) vmax = std::max(vmax, std::abs(s.value));
    if (vmax == 0.0) vmax = 1.0;
    const Vector xu = normalize(NormSpec::lp(2, 2), *opt.x);
    os << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(xu[0]) << "\" y2=\""
       << py(xu[1]) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    for (const auto& s : d.samples) {
      const char* color = s.value > 0 ? "#c0392b" : (s.value < 0 ? "#2e64b0" : "#333");
      os << "<circle cx=\"" << px(s.point[0]) << "\" cy=\"" << py(s.point[1])
         << "\" r=\"3\" fill=\"" << color << "\" fill-opacity=\""
         << detail::num(0.15 + 0.85 * std::abs(s.value) / vmax) << "\"/>\n";
    }
    for (double deg : d.zero_crossings) {
      const double r = deg * std::numbers::pi / 180.0;
      os << "<line x1=\"" << px(0.9 * std::cos(r)) << "\" y1=\"" << py(0.9 * std::sin(r))
         << "\" x2=\"" << px(1.1 * std::cos(r)) << "\" y2=\"" << py(1.1 * std::sin(r))
         << "\" stroke=\"#2a9d3a\" stroke-width=\"3\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

struct PlotFiles {
  std::filesystem::path svg;
  std::filesystem::path csv;
  PlotData data;
};

/// Writes out_path (SVG) and the same path with a .csv extension.
inline PlotFiles plot(const NormSpec& spec, const PlotOptions& opt,
                      const std::filesystem::path& out_path) {
  PlotFiles files;
  files.data = plot_data(spec, opt);
  files.svg = out_path;
  files.csv = std::filesystem::path(out_path).replace_extension(".csv");
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p);
    if (!f) throw Error(ErrorCode::io_error, "cannot write '" + p.string() + "'");
    f << text;
    if (!f) throw Error(ErrorCode::io_error, "write failed for '" + p.string() + "'");
  };
  write(files.svg, plot_svg(spec, files.data, opt));
  write(files.csv, plot_csv(files.data, opt.kind));
  return files;
}

}  // namespace rholab
