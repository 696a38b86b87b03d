#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rholab/error.hpp"
#include "rholab/vector.hpp"

namespace rholab {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline double parse_decimal(std::string_view s, std::string_view whole) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error(ErrorCode::invalid_argument,
                "cannot parse number '" + std::string(whole) + "'");
  return v;
}

}  // namespace detail

/// Parses a real literal: decimal ("0.5", "1e-3"), rational ("1/3", "-2/7"),
/// or "inf". A rational p/q is the correctly rounded quotient of the two
/// parsed integers.
inline double parse_scalar(std::string_view text) {
  std::string_view s = detail::trim(text);
  if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    const double num = detail::parse_decimal(s.substr(0, slash), text);
    const double den = detail::parse_decimal(s.substr(slash + 1), text);
    if (den == 0.0)
      throw Error(ErrorCode::invalid_argument,
                  "zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  return detail::parse_decimal(s, text);
}

/// Parses a comma-separated list of scalar literals into a Vector.
inline Vector parse_vector(std::string_view text) {
  std::vector<double> out;
  std::string_view s = detail::trim(text);
  if (!s.empty() && (s.front() == '(' || s.front() == '[')) s.remove_prefix(1);
  if (!s.empty() && (s.back() == ')' || s.back() == ']')) s.remove_suffix(1);
  while (!s.empty()) {
    const auto comma = s.find(',');
    out.push_back(parse_scalar(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  if (out.empty())
    throw Error(ErrorCode::invalid_argument, "empty vector literal");
  return Vector(std::move(out));
}

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Best rational approximation with denominator at most max_den (continued
/// fractions); returned only when it reproduces v exactly as a double.
inline std::optional<Rational> as_small_rational(double v, std::int64_t max_den = 1024) {
  if (!std::isfinite(v) || std::abs(v) > 1e12) return std::nullopt;
  const bool neg = v < 0;
  double x = std::abs(v);
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_f = std::floor(r);
    if (a_f > 1e12) break;
    const auto a = static_cast<std::int64_t>(a_f);
    const std::int64_t h2 = a * h1 + h0;
    const std::int64_t k2 = a * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    if (static_cast<double>(h1) / static_cast<double>(k1) == x) {
      return Rational{neg ? -h1 : h1, k1};
    }
    const double frac = r - a_f;
    if (frac == 0.0) break;
    r = 1.0 / frac;
  }
  return std::nullopt;
}

/// Shortest decimal string that round-trips to the same double.
inline std::string format_decimal(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

/// Renders v as "p/q" (or an integer) when it is exactly a small rational,
/// otherwise as the shortest round-trip decimal.
inline std::string format_scalar(double v) {
  if (v == 0.0) return "0";
  if (auto q = as_small_rational(v)) {
    if (q->den == 1) return std::to_string(q->num);
    return std::to_string(q->num) + "/" + std::to_string(q->den);
  }
  return format_decimal(v);
}

inline std::string format_vector(const Vector& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.dim(); ++i) {
    if (i) out += ", ";
    out += format_scalar(v[i]);
  }
  return out + ")";
}

}  // namespace rholab
