#pragma once

#include <vector>

#include "sdmm/matrix.hpp"

namespace sdmm {

/// Standard matrix product with a fixed i-j-k accumulation order (k innermost),
/// so results are reproducible bit-for-bit across runs on the same platform.
/// Serves as the ground-truth oracle for every decoded product.
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

/// Conjugate transpose.
ComplexMatrix conjugate_transpose(const ComplexMatrix& m);

/// V[i][j] = points[i]^j for j in 0..degree-1. Points must be pairwise distinct.
ComplexMatrix vandermonde(const std::vector<Complex>& points, std::size_t degree);

/// Solves sum_j C_j * points[i]^j == rhs[i] for the coefficient matrices
/// C_0..C_{K-1} with K == |points|. All rhs matrices share one K x K system,
/// factored once (column-pivoted QR) and applied across every entry.
std::vector<ComplexMatrix> solve_vandermonde(const std::vector<Complex>& points,
                                             const std::vector<ComplexMatrix>& rhs);

/// Overdetermined variant: num_coefficients <= |points| coefficients are fit
/// by least squares over all supplied points. With num_coefficients == |points|
/// this is exact interpolation.
std::vector<ComplexMatrix> solve_vandermonde(const std::vector<Complex>& points,
                                             const std::vector<ComplexMatrix>& rhs,
                                             std::size_t num_coefficients);

/// 2-norm condition number sigma_max / sigma_min via full SVD. Requires a
/// square matrix; returns +infinity when sigma_min underflows to zero.
double condition_number(const ComplexMatrix& m);

/// Same ratio for an arbitrary (possibly rectangular) matrix. Used for the
/// decoding matrix of overdetermined interpolation.
double spectral_condition(const ComplexMatrix& m);

double frobenius_norm(const ComplexMatrix& m);

/// ||a - b||_F. Shapes must match.
double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b);

/// ||a - b||_F / ||b||_F.
double relative_frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b);

/// m * m^H. Hermitian positive semi-definite by construction.
ComplexMatrix hermitian_gram(const ComplexMatrix& m);

/// Real part of Tr(gram^{-1} * rhs) for Hermitian positive-definite gram.
/// Throws SingularSystemError when gram is not positive definite, and Error
/// when the imaginary part of the trace exceeds 1e-9 (both operands are
/// expected Hermitian PSD, so the trace must be essentially real).
double trace_of_solve(const ComplexMatrix& gram, const ComplexMatrix& rhs);

}  // namespace sdmm
