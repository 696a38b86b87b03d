#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rholab/error.hpp"
#include "rholab/norm.hpp"
#include "rholab/rational.hpp"

namespace rholab {

using json = nlohmann::json;

namespace detail {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::config_error, "at " + (path.empty() ? std::string("/") : path) + ": " + msg);
}

// Numbers may be JSON numbers or strings holding a rational literal ("1/3").
inline double scalar_from_json(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return parse_scalar(j.get<std::string>());
    } catch (const Error& e) {
      schema_error(path, e.what());
    }
  }
  schema_error(path, "expected a number or a rational string");
}

inline std::vector<double> scalars_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(scalar_from_json(j[i], path + "/" + std::to_string(i)));
  return out;
}

inline std::vector<std::vector<double>> rows_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(scalars_from_json(j[i], path + "/" + std::to_string(i)));
  return out;
}

inline const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) schema_error(path, std::string("missing field '") + key + "'");
  return j.at(key);
}

inline json exponent_to_json(const Exponent& p) {
  if (p.is_infinite()) return "inf";
  return p.value();
}

inline json rows_to_json(const Matrix& m) {
  json rows = json::array();
  for (const auto& r : m.to_rows()) rows.push_back(r);
  return rows;
}

}  // namespace detail

inline json norm_to_json(const NormSpec& spec) {
  json j;
  j["family"] = to_string(spec.family());
  j["dim"] = spec.dim();
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LpNorm>) {
          j["p"] = detail::exponent_to_json(n.p);
        } else if constexpr (std::is_same_v<T, WeightedLpNorm>) {
          j["p"] = detail::exponent_to_json(n.p);
          j["weights"] = n.weights;
        } else if constexpr (std::is_same_v<T, PolyhedralNorm>) {
          json fs = json::array();
          for (const auto& a : n.functionals) fs.push_back(a.to_std());
          j["functionals"] = fs;
        } else {
          j["matrix"] = detail::rows_to_json(n.matrix);
          j["base"] = norm_to_json(*n.base);
        }
      },
      spec.variant());
  return j;
}

/// Parses a NormSpec. `default_dim` fills in a missing "dim" (0 = required);
/// `path` prefixes error locations as a JSON pointer.
inline NormSpec norm_from_json(const json& j, std::size_t default_dim = 0,
                               const std::string& path = "") {
  if (!j.is_object()) detail::schema_error(path, "norm must be a JSON object");
  const auto family_j = detail::field(j, "family", path);
  if (!family_j.is_string()) detail::schema_error(path + "/family", "expected a string");
  const std::string family = family_j.get<std::string>();

  std::size_t dim = default_dim;
  if (j.contains("dim")) {
    if (!j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0)
      detail::schema_error(path + "/dim", "expected a positive integer");
    dim = j["dim"].get<std::size_t>();
  }

  try {
    if (family == "lp") {
      if (dim == 0) detail::schema_error(path + "/dim", "missing dimension");
      return NormSpec::lp(Exponent(detail::scalar_from_json(detail::field(j, "p", path), path + "/p")),
                          dim);
    }
    if (family == "weighted_lp") {
      auto w = detail::scalars_from_json(detail::field(j, "weights", path), path + "/weights");
      if (dim != 0 && w.size() != dim)
        detail::schema_error(path + "/weights", "length differs from dim");
      return NormSpec::weighted_lp(
          Exponent(detail::scalar_from_json(detail::field(j, "p", path), path + "/p")), std::move(w));
    }
    if (family == "polyhedral") {
      std::vector<Vector> fs;
      for (auto& r : detail::rows_from_json(detail::field(j, "functionals", path),
                                            path + "/functionals"))
        fs.emplace_back(std::move(r));
      if (dim != 0 && !fs.empty() && fs.front().dim() != dim)
        detail::schema_error(path + "/functionals", "functional length differs from dim");
      return NormSpec::polyhedral(std::move(fs));
    }
    if (family == "linear_image") {
      Matrix a = Matrix::from_rows(
          detail::rows_from_json(detail::field(j, "matrix", path), path + "/matrix"));
      NormSpec base = norm_from_json(detail::field(j, "base", path), a.rows(), path + "/base");
      if (dim != 0 && a.cols() != dim) detail::schema_error(path + "/matrix", "shape differs from dim");
      return NormSpec::linear_image(std::move(a), std::move(base));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_error) throw;
    detail::schema_error(path, e.what());
  }
  detail::schema_error(path + "/family", "unknown norm family '" + family + "'");
}

}  // namespace rholab
