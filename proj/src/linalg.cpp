#include "sdmm/linalg.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <set>
#include <utility>

namespace sdmm {

namespace {

using EigenMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EigenMap = Eigen::Map<EigenMatrix>;
using ConstEigenMap = Eigen::Map<const EigenMatrix>;

ConstEigenMap as_eigen(const ComplexMatrix& m) {
  return ConstEigenMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                       static_cast<Eigen::Index>(m.cols()));
}

void require_distinct(const std::vector<Complex>& points) {
  std::set<std::pair<double, double>> seen;
  for (const Complex& z : points) {
    if (!seen.insert({z.real(), z.imag()}).second) {
      throw InvalidArgument("evaluation points must be pairwise distinct");
    }
  }
}

}  // namespace

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul inner dimension mismatch", a.rows(), a.cols(), b.rows(),
                         b.cols());
  }
  ComplexMatrix out(a.rows(), b.cols());
  const std::size_t inner = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const Complex* a_row = a.data() + i * inner;
    for (std::size_t j = 0; j < b.cols(); ++j) {
      Complex acc(0.0, 0.0);
      for (std::size_t k = 0; k < inner; ++k) {
        acc += a_row[k] * b(k, j);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

ComplexMatrix conjugate_transpose(const ComplexMatrix& m) {
  ComplexMatrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out(j, i) = std::conj(m(i, j));
    }
  }
  return out;
}

ComplexMatrix vandermonde(const std::vector<Complex>& points, std::size_t degree) {
  if (degree == 0) {
    throw InvalidArgument("vandermonde degree must be at least 1");
  }
  require_distinct(points);
  ComplexMatrix v(points.size(), degree);
  for (std::size_t i = 0; i < points.size(); ++i) {
    Complex power(1.0, 0.0);
    for (std::size_t j = 0; j < degree; ++j) {
      v(i, j) = power;
      power *= points[i];
    }
  }
  return v;
}

std::vector<ComplexMatrix> solve_vandermonde(const std::vector<Complex>& points,
                                             const std::vector<ComplexMatrix>& rhs) {
  return solve_vandermonde(points, rhs, points.size());
}

std::vector<ComplexMatrix> solve_vandermonde(const std::vector<Complex>& points,
                                             const std::vector<ComplexMatrix>& rhs,
                                             std::size_t num_coefficients) {
  if (points.size() != rhs.size()) {
    throw InvalidArgument("solve_vandermonde needs one rhs matrix per point (" +
                          std::to_string(points.size()) + " points, " +
                          std::to_string(rhs.size()) + " rhs)");
  }
  if (num_coefficients == 0 || num_coefficients > points.size()) {
    throw InvalidArgument("solve_vandermonde: coefficient count must be in 1..|points|");
  }
  for (const ComplexMatrix& m : rhs) {
    if (!m.same_shape(rhs.front())) {
      throw DimensionError("solve_vandermonde rhs matrices must share a shape", rhs.front().rows(),
                           rhs.front().cols(), m.rows(), m.cols());
    }
  }

  const ComplexMatrix v = vandermonde(points, num_coefficients);
  const auto v_eigen = as_eigen(v);

  // Entries of every rhs matrix share the same system: stack them as columns.
  const std::size_t block_size = rhs.front().size();
  EigenMatrix stacked(static_cast<Eigen::Index>(points.size()),
                      static_cast<Eigen::Index>(block_size));
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    for (std::size_t e = 0; e < block_size; ++e) {
      stacked(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e)) =
          rhs[i].data()[e];
    }
  }

  Eigen::ColPivHouseholderQR<EigenMatrix> qr(v_eigen);
  if (qr.rank() < static_cast<Eigen::Index>(num_coefficients)) {
    throw SingularSystemError("Vandermonde system is numerically singular",
                              spectral_condition(v));
  }
  const EigenMatrix solution = qr.solve(stacked);

  std::vector<ComplexMatrix> coefficients;
  coefficients.reserve(num_coefficients);
  for (std::size_t j = 0; j < num_coefficients; ++j) {
    ComplexMatrix c(rhs.front().rows(), rhs.front().cols());
    for (std::size_t e = 0; e < block_size; ++e) {
      c.data()[e] = solution(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(e));
    }
    coefficients.push_back(std::move(c));
  }
  return coefficients;
}

double spectral_condition(const ComplexMatrix& m) {
  if (m.empty()) {
    throw InvalidArgument("condition number of an empty matrix");
  }
  Eigen::JacobiSVD<EigenMatrix> svd(as_eigen(m));
  const auto& sv = svd.singularValues();
  const double sigma_max = sv(0);
  const double sigma_min = sv(sv.size() - 1);
  if (sigma_min <= 0.0 || !std::isfinite(sigma_max / sigma_min)) {
    return std::numeric_limits<double>::infinity();
  }
  return sigma_max / sigma_min;
}

double condition_number(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("condition number requires a square matrix", m.rows(), m.cols(),
                         m.cols(), m.rows());
  }
  return spectral_condition(m);
}

double frobenius_norm(const ComplexMatrix& m) {
  double sum = 0.0;
  for (const Complex& z : m.entries()) {
    sum += std::norm(z);
  }
  return std::sqrt(sum);
}

double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("frobenius distance shape mismatch", a.rows(), a.cols(), b.rows(),
                         b.cols());
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sum += std::norm(a.data()[k] - b.data()[k]);
  }
  return std::sqrt(sum);
}

double relative_frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  return frobenius_distance(a, b) / frobenius_norm(b);
}

ComplexMatrix hermitian_gram(const ComplexMatrix& m) {
  ComplexMatrix out(m.rows(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      Complex acc(0.0, 0.0);
      for (std::size_t k = 0; k < m.cols(); ++k) {
        acc += m(i, k) * std::conj(m(j, k));
      }
      out(i, j) = acc;
      out(j, i) = std::conj(acc);
    }
    // Diagonal is real by construction; drop rounding residue.
    out(i, i) = Complex(out(i, i).real(), 0.0);
  }
  return out;
}

double trace_of_solve(const ComplexMatrix& gram, const ComplexMatrix& rhs) {
  if (gram.rows() != gram.cols()) {
    throw DimensionError("trace_of_solve gram must be square", gram.rows(), gram.cols(),
                         gram.cols(), gram.rows());
  }
  if (!gram.same_shape(rhs)) {
    throw DimensionError("trace_of_solve operand shape mismatch", gram.rows(), gram.cols(),
                         rhs.rows(), rhs.cols());
  }
  Eigen::LLT<EigenMatrix> llt(as_eigen(gram));
  if (llt.info() != Eigen::Success) {
    throw SingularSystemError("gram matrix is not positive definite", spectral_condition(gram));
  }
  const EigenMatrix solved = llt.solve(EigenMatrix(as_eigen(rhs)));
  const Complex trace = solved.trace();
  if (std::abs(trace.imag()) > 1e-9 * std::max(1.0, std::abs(trace.real()))) {
    throw Error("trace_of_solve produced a non-real trace: imag " +
                std::to_string(trace.imag()));
  }
  return trace.real();
}

}  // namespace sdmm
