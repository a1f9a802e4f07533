#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdmm/matrix.hpp"
#include "sdmm/scheme.hpp"

namespace sdmm {

enum class Side { kA, kB };

struct Dims {
  std::size_t t = 0;
  std::size_t s = 0;
  std::size_t r = 0;
};

/// Rows of the encoding generator matrix for one side, split into the data
/// monomials and the noise monomials, evaluated at all N points:
/// data_rows[j][i] = alpha_i^{data exponent j}, noise_rows[k][i] likewise.
struct GeneratorSplit {
  Scheme scheme = Scheme::kMatDot;
  Side side = Side::kA;
  std::size_t block_divisor = 1; // p for MatDot; m (side A) or n (side B) for GASP
  std::vector<std::size_t> data_exponents;
  std::vector<std::size_t> noise_exponents;
  ComplexMatrix data_rows;  // |data exponents| x N
  ComplexMatrix noise_rows; // X x N
};

/// Sorted set of colluding server ids (1-based), size X.
struct CollusionSet {
  std::vector<std::uint32_t> indices;

  std::size_t size() const { return indices.size(); }
  bool operator==(const CollusionSet&) const = default;
};

enum class SearchStrategy { kExhaustive, kConsecutive };

struct WorstCollusion {
  CollusionSet set;
  double bound_a_bits = 0.0;
  double bound_b_bits = 0.0;
  double total_bits = 0.0;
  SearchStrategy strategy = SearchStrategy::kExhaustive;
  /// True when the exhaustive argmax is a set of cyclically consecutive
  /// points; unset under the consecutive heuristic (nothing to compare).
  std::optional<bool> consecutive_argmax;
};

struct LeakageReport {
  Scheme scheme = Scheme::kMatDot;
  SchemeParams params;
  Dims dims;
  double delta_bits = 0.0;
  double sigma2 = 0.0;
  WorstCollusion worst;
  /// Set when the exhaustive search was downgraded to the consecutive
  /// heuristic because C(N, X) exceeded the exhaustive default cap.
  bool heuristic_warning = false;
};

GeneratorSplit generator_split(const MatDotParams& params, const EvaluationPoints& points,
                               Side side);
GeneratorSplit generator_split(const GaspParams& params, const EvaluationPoints& points,
                               Side side);
GeneratorSplit generator_split(const SchemeParams& params, const EvaluationPoints& points,
                               Side side);

/// Per-side leakage upper bound in bits for one collusion set:
///   (block_elements / ln 2) * (1 / sigma2) * Tr(Gamma^{-1} Sigma')
/// with Gamma the Gram of the noise rows restricted to the colluding columns
/// and Sigma' the input-variance-scaled Gram of the restricted data rows.
/// block_elements is ts/p or sr/p for MatDot and ts/m or sr/n for GASP.
double leakage_bound(const GeneratorSplit& split, const CollusionSet& colluders,
                     const NoiseSpec& noise, const Dims& dims);

/// Maximizes bound_a + bound_b over X-subsets of [N]. Exhaustive enumerates
/// every subset (error when C(N, X) > 10^6); consecutive checks only the N
/// cyclic windows. Ties break toward the lexicographically smallest set.
WorstCollusion worst_collusion(const GeneratorSplit& split_a, const GeneratorSplit& split_b,
                               const NoiseSpec& noise, const Dims& dims, std::size_t n_servers,
                               std::size_t x, SearchStrategy strategy);

/// Strategy used when the caller does not force one: exhaustive up to
/// C(N, X) <= 20000, the consecutive heuristic beyond that.
SearchStrategy default_strategy(std::size_t n_servers, std::size_t x);

/// Minimal sigma2 for which the worst-case total leakage equals delta_bits.
/// The bound is exactly proportional to 1/sigma2, so the trace terms are
/// evaluated once at sigma2 = 1 and scaled.
NoiseSpec calibrate_sigma2(double delta_bits, const Dims& dims, const SchemeParams& params,
                           const EvaluationPoints& points, double input_sigma2_a,
                           double input_sigma2_b, SearchStrategy strategy);

/// Full calibration report (worst set, per-side bounds at the calibrated
/// sigma2, strategy provenance) for the CLI and experiment metadata.
LeakageReport make_leakage_report(double delta_bits, const Dims& dims, const SchemeParams& params,
                                  const EvaluationPoints& points, double input_sigma2_a,
                                  double input_sigma2_b,
                                  std::optional<SearchStrategy> strategy = std::nullopt);

std::string leakage_report_to_json(const LeakageReport& report);

/// Exact mutual information, in bits, leaked by one scalar share
/// a + r * alpha with Gaussian secret and mask:
///   0.5 * log2(1 + sigma_a2 / (|alpha|^2 * sigma_r2)).
/// alpha == 0 is rejected: such a share hands over the secret directly.
double scalar_leakage_exact(double sigma_a2, double sigma_r2, Complex alpha);

/// Differential entropy in bits of one real / circular complex Gaussian
/// entry with the given variance.
double real_gaussian_entropy_bits(double variance);
double complex_gaussian_entropy_bits(double variance);

/// Entropy proxy of the declared input distribution over all (t*s + s*r)
/// input entries; the denominator of the "relative leakage" normalization.
double input_entropy_proxy_bits(const Dims& dims, bool complex_inputs, double variance);

}  // namespace sdmm
