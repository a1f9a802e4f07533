#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "sdmm/errors.hpp"

namespace sdmm {

using Complex = std::complex<double>;

/// Dense complex matrix in IEEE-754 double precision, row-major storage.
///
/// This is the carrier for all inputs, masks, shares and results. Entries
/// are validated to be finite on checked construction.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  /// Zero matrix of the given shape.
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, Complex(0.0, 0.0)) {}

  /// Takes ownership of row-major entries; throws InvalidArgument on size
  /// mismatch or non-finite entries.
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

  static ComplexMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  Complex& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  const std::vector<Complex>& entries() const { return entries_; }
  Complex* data() { return entries_.data(); }
  const Complex* data() const { return entries_.data(); }

  bool same_shape(const ComplexMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  /// True when every entry is finite in both components.
  bool all_finite() const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex scalar);

  friend ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) {
    lhs += rhs;
    return lhs;
  }
  friend ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) {
    lhs -= rhs;
    return lhs;
  }
  friend ComplexMatrix operator*(ComplexMatrix m, Complex scalar) {
    m *= scalar;
    return m;
  }
  friend ComplexMatrix operator*(Complex scalar, ComplexMatrix m) {
    m *= scalar;
    return m;
  }

  bool operator==(const ComplexMatrix& other) const = default;

  /// Accumulates scalar * other into this matrix. Shapes must match.
  void add_scaled(Complex scalar, const ComplexMatrix& other);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> entries_;
};

/// Evaluation points on the complex unit circle, pairwise distinct.
///
/// The canonical construction places point k (0-based storage index) at
/// exp(2*pi*i*(k+1)/n), so server id i in 1..n evaluates at the i-th power
/// of the primitive n-th root of unity.
class EvaluationPoints {
 public:
  explicit EvaluationPoints(std::vector<Complex> points);

  /// All n-th roots of unity, indexed so that point_for_server(i) is the
  /// i-th power of the primitive root.
  static EvaluationPoints roots_of_unity(std::size_t n);

  std::size_t size() const { return points_.size(); }
  const Complex& operator[](std::size_t idx) const { return points_[idx]; }
  const std::vector<Complex>& points() const { return points_; }

  /// server_id is 1-based.
  const Complex& point_for_server(std::uint32_t server_id) const {
    return points_.at(server_id - 1);
  }

 private:
  std::vector<Complex> points_;
};

}  // namespace sdmm
