#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rholab/error.hpp"

namespace rholab {

/// Finite real coordinate vector. Every constructor that accepts external data
/// rejects NaN and infinite coordinates; arithmetic between valid vectors
/// produces valid vectors.
class Vector {
 public:
  Vector() = default;

  explicit Vector(std::size_t dim, double fill = 0.0) : coords_(dim, fill) {
    check_finite();
  }

  Vector(std::initializer_list<double> coords) : coords_(coords) {
    check_finite();
  }

  explicit Vector(std::vector<double> coords) : coords_(std::move(coords)) {
    check_finite();
  }

  explicit Vector(std::span<const double> coords)
      : coords_(coords.begin(), coords.end()) {
    check_finite();
  }

  static Vector basis(std::size_t dim, std::size_t index) {
    Vector e(dim);
    e.coords_.at(index) = 1.0;
    return e;
  }

  std::size_t dim() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }
  const std::vector<double>& to_std() const noexcept { return coords_; }

  bool is_zero() const noexcept {
    return std::all_of(coords_.begin(), coords_.end(),
                       [](double c) { return c == 0.0; });
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double c : coords_) m = std::max(m, std::abs(c));
    return m;
  }

  Vector operator-() const {
    std::vector<double> out(coords_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -coords_[i];
    return Vector(unchecked{}, std::move(out));
  }

  friend Vector operator+(const Vector& a, const Vector& b) {
    require_same_dim(a, b);
    std::vector<double> out(a.dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    return Vector(unchecked{}, std::move(out));
  }

  friend Vector operator-(const Vector& a, const Vector& b) {
    require_same_dim(a, b);
    std::vector<double> out(a.dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
    return Vector(unchecked{}, std::move(out));
  }

  friend Vector operator*(double s, const Vector& v) {
    std::vector<double> out(v.dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * v[i];
    return Vector(unchecked{}, std::move(out));
  }

  friend Vector operator/(const Vector& v, double s) {
    std::vector<double> out(v.dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] / s;
    return Vector(unchecked{}, std::move(out));
  }

  // a + s*b without an intermediate allocation
  friend Vector axpy(const Vector& a, double s, const Vector& b) {
    require_same_dim(a, b);
    std::vector<double> out(a.dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + s * b[i];
    return Vector(unchecked{}, std::move(out));
  }

  friend bool operator==(const Vector& a, const Vector& b) = default;

  static void require_same_dim(const Vector& a, const Vector& b) {
    if (a.dim() != b.dim())
      throw Error(ErrorCode::dimension_mismatch,
                  "vector dimensions differ: " + std::to_string(a.dim()) +
                      " vs " + std::to_string(b.dim()));
  }

 private:
  friend class Matrix;
  struct unchecked {};
  Vector(unchecked, std::vector<double> coords) : coords_(std::move(coords)) {}

  void check_finite() const {
    for (double c : coords_)
      if (!std::isfinite(c))
        throw Error(ErrorCode::invalid_argument,
                    "vector coordinates must be finite");
  }

  std::vector<double> coords_;
};

inline double dot(const Vector& a, const Vector& b) {
  Vector::require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<std::vector<double>> r;
    for (const auto& row : rows) r.emplace_back(row);
    *this = from_rows(r);
  }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Matrix();
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_)
        throw Error(ErrorCode::invalid_argument, "ragged matrix rows");
      for (std::size_t j = 0; j < m.cols_; ++j) {
        if (!std::isfinite(rows[i][j]))
          throw Error(ErrorCode::invalid_argument,
                      "matrix entries must be finite");
        m(i, j) = rows[i][j];
      }
    }
    return m;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  // Rotation by `angle` radians in the (i, j) coordinate plane of R^n.
  static Matrix plane_rotation(std::size_t n, double angle, std::size_t i = 0,
                               std::size_t j = 1) {
    Matrix m = identity(n);
    const double c = std::cos(angle), s = std::sin(angle);
    m(i, i) = c;
    m(i, j) = -s;
    m(j, i) = s;
    m(j, j) = c;
    return m;
  }

  // Permutation matrix sending e_k to e_{perm[k]}.
  static Matrix permutation(const std::vector<std::size_t>& perm) {
    Matrix m(perm.size(), perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) m(perm.at(k), k) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }

  Vector row(std::size_t r) const {
    return Vector(std::span<const double>(data_.data() + r * cols_, cols_));
  }

  Vector column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return Vector(Vector::unchecked{}, std::move(out));
  }

  std::vector<std::vector<double>> to_rows() const {
    std::vector<std::vector<double>> out(rows_, std::vector<double>(cols_));
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out[r][c] = (*this)(r, c);
    return out;
  }

  Vector operator*(const Vector& v) const {
    if (v.dim() != cols_)
      throw Error(ErrorCode::dimension_mismatch,
                  "matrix has " + std::to_string(cols_) +
                      " columns but vector has dimension " +
                      std::to_string(v.dim()));
    std::vector<double> out(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < cols_; ++c) s += (*this)(r, c) * v[c];
      out[r] = s;
    }
    return Vector(Vector::unchecked{}, std::move(out));
  }

  friend Matrix operator*(double s, Matrix m) {
    for (double& e : m.data_) e *= s;
    return m;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_)
      throw Error(ErrorCode::dimension_mismatch, "matrix product shape");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k)
        for (std::size_t j = 0; j < b.cols_; ++j)
          out(i, j) += a(i, k) * b(k, j);
    return out;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Numerical rank by Gaussian elimination with partial pivoting; a pivot is
/// zero when it is below rel_tol times the largest entry magnitude.
inline std::size_t rank(const Matrix& m, double rel_tol = 1e-12) {
  Matrix a = m;
  double scale = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c)
      scale = std::max(scale, std::abs(a(r, c)));
  if (scale == 0.0) return 0;
  std::size_t rk = 0;
  for (std::size_t c = 0; c < a.cols() && rk < a.rows(); ++c) {
    std::size_t piv = rk;
    for (std::size_t r = rk + 1; r < a.rows(); ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (std::abs(a(piv, c)) <= rel_tol * scale) continue;
    for (std::size_t k = 0; k < a.cols(); ++k) std::swap(a(rk, k), a(piv, k));
    for (std::size_t r = rk + 1; r < a.rows(); ++r) {
      const double f = a(r, c) / a(rk, c);
      for (std::size_t k = c; k < a.cols(); ++k) a(r, k) -= f * a(rk, k);
    }
    ++rk;
  }
  return rk;
}

/// Inverse of a square matrix by Gauss-Jordan elimination; nullopt when the
/// matrix is numerically singular.
inline std::optional<Matrix> inverse(const Matrix& m, double rel_tol = 1e-12) {
  if (!m.is_square()) return std::nullopt;
  const std::size_t n = m.rows();
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  double scale = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) scale = std::max(scale, std::abs(a(r, c)));
  if (scale == 0.0) return std::nullopt;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (std::abs(a(piv, c)) <= rel_tol * scale) return std::nullopt;
    for (std::size_t k = 0; k < n; ++k) {
      std::swap(a(c, k), a(piv, k));
      std::swap(inv(c, k), inv(piv, k));
    }
    const double p = a(c, c);
    for (std::size_t k = 0; k < n; ++k) {
      a(c, k) /= p;
      inv(c, k) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a(r, k) -= f * a(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  return inv;
}

}  // namespace rholab
