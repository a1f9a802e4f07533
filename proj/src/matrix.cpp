#include "sdmm/matrix.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <utility>

namespace sdmm {

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw InvalidArgument("entry count " + std::to_string(entries_.size()) +
                          " does not match shape " + std::to_string(rows_) + "x" +
                          std::to_string(cols_));
  }
  if (!all_finite()) {
    throw InvalidArgument("matrix entries must be finite");
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = Complex(1.0, 0.0);
  }
  return m;
}

bool ComplexMatrix::all_finite() const {
  for (const Complex& z : entries_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      return false;
    }
  }
  return true;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  if (!same_shape(other)) {
    throw DimensionError("matrix addition shape mismatch", rows_, cols_, other.rows_, other.cols_);
  }
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    entries_[k] += other.entries_[k];
  }
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  if (!same_shape(other)) {
    throw DimensionError("matrix subtraction shape mismatch", rows_, cols_, other.rows_,
                         other.cols_);
  }
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    entries_[k] -= other.entries_[k];
  }
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scalar) {
  for (Complex& z : entries_) {
    z *= scalar;
  }
  return *this;
}

void ComplexMatrix::add_scaled(Complex scalar, const ComplexMatrix& other) {
  if (!same_shape(other)) {
    throw DimensionError("add_scaled shape mismatch", rows_, cols_, other.rows_, other.cols_);
  }
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    entries_[k] += scalar * other.entries_[k];
  }
}

namespace {

bool points_distinct(const std::vector<Complex>& points) {
  // Exact comparison: canonical roots are constructed once and reused,
  // and decoding correctness needs genuinely distinct points.
  std::set<std::pair<double, double>> seen;
  for (const Complex& z : points) {
    if (!seen.insert({z.real(), z.imag()}).second) {
      return false;
    }
  }
  return true;
}

}  // namespace

EvaluationPoints::EvaluationPoints(std::vector<Complex> points) : points_(std::move(points)) {
  if (points_.empty()) {
    throw InvalidArgument("evaluation point set must be non-empty");
  }
  if (!points_distinct(points_)) {
    throw InvalidArgument("evaluation points must be pairwise distinct");
  }
  for (const Complex& z : points_) {
    if (std::abs(std::abs(z) - 1.0) > 1e-12) {
      throw InvalidArgument("evaluation points must lie on the unit circle");
    }
  }
}

EvaluationPoints EvaluationPoints::roots_of_unity(std::size_t n) {
  if (n == 0) {
    throw InvalidArgument("need at least one root of unity");
  }
  std::vector<Complex> points;
  points.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    points.push_back(std::polar(1.0, angle));
  }
  return EvaluationPoints(std::move(points));
}

}  // namespace sdmm
