#pragma once

#include <numbers>
#include <string>
#include <vector>

#include "rholab/mappings.hpp"
#include "rholab/norm.hpp"
#include "rholab/vector.hpp"

namespace rholab::fixtures {

/// Coordinate functionals plus consecutive differences e_i - e_{i+1}. In the
/// plane this is the hexagon with vertices (±1, 0), (0, ±1), ±(1, 1).
inline NormSpec hexagon(std::size_t dim) {
  std::vector<Vector> fs;
  for (std::size_t i = 0; i < dim; ++i) fs.push_back(Vector::basis(dim, i));
  for (std::size_t i = 0; i + 1 < dim; ++i)
    fs.push_back(Vector::basis(dim, i) - Vector::basis(dim, i + 1));
  return NormSpec::polyhedral(std::move(fs));
}

/// ||S x||_2 with S the identity plus 1/2 on the superdiagonal: smooth but
/// not rotation invariant.
inline NormSpec sheared_l2(std::size_t dim) {
  Matrix s = Matrix::identity(dim);
  for (std::size_t i = 0; i + 1 < dim; ++i) s(i, i + 1) = 0.5;
  return NormSpec::linear_image(std::move(s), NormSpec::lp(2, dim));
}

/// The seven fixture families at one dimension: l_1, l_1.5, l_2, l_3,
/// l_inf, the hexagon and the sheared l_2.
inline std::vector<NormSpec> norms(std::size_t dim) {
  return {NormSpec::lp(1, dim),    NormSpec::lp(1.5, dim), NormSpec::lp(2, dim),
          NormSpec::lp(3, dim),    NormSpec::max_norm(dim), hexagon(dim),
          sheared_l2(dim)};
}

inline std::vector<NormSpec> norms(const std::vector<std::size_t>& dims) {
  std::vector<NormSpec> out;
  for (std::size_t d : dims)
    for (auto& n : norms(d)) out.push_back(std::move(n));
  return out;
}

inline const std::vector<std::size_t>& dims() {
  static const std::vector<std::size_t> d{2, 3, 4};
  return d;
}

inline const std::vector<double>& lambdas() {
  static const std::vector<double> l{0.0, 0.25, 0.5, 0.75, 1.0};
  return l;
}

struct MapFixture {
  std::string name;
  LinearMap map;
  bool similarity;
};

/// Maps on which the three equivalent preservation conditions are checked.
inline std::vector<MapFixture> maps() {
  const auto l2 = NormSpec::lp(2, 2);
  return {
      {"rotation(30deg) on l2", LinearMap(Matrix::plane_rotation(2, std::numbers::pi / 6), l2),
       true},
      {"3*permutation on linf", LinearMap(3.0 * Matrix::permutation({2, 0, 1}), NormSpec::max_norm(3)),
       true},
      {"2*identity on l3", LinearMap(2.0 * Matrix::identity(3), NormSpec::lp(3, 3)), true},
      {"diag(1,2) on l2", LinearMap(Matrix::diagonal(std::vector<double>{1, 2}), l2), false},
      {"shear on l2", LinearMap(Matrix::from_rows({{1, 1}, {0, 1}}), l2), false},
  };
}

}  // namespace rholab::fixtures
