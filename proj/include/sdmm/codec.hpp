#pragma once

#include <cstdint>
#include <vector>

#include "sdmm/cmat.hpp"
#include "sdmm/matrix.hpp"
#include "sdmm/partition.hpp"
#include "sdmm/rng.hpp"
#include "sdmm/scheme.hpp"

namespace sdmm {

/// One server's encoded pair: the evaluations of the two share polynomials
/// at that server's point.
struct Share {
  std::uint32_t server_id = 0;   // 1-based
  std::uint32_t point_index = 0; // 1-based exponent of the primitive root
  Complex point;
  ComplexMatrix a_share;
  ComplexMatrix b_share;
};

struct ShareSet {
  Scheme scheme = Scheme::kMatDot;
  NoiseSpec noise;
  std::vector<Share> shares; // exactly N, ordered by server id

  ShareHeader header_for(std::size_t idx) const {
    const Share& s = shares[idx];
    return ShareHeader{static_cast<std::uint8_t>(scheme), s.server_id, s.point_index};
  }
};

/// One server's answer: the product of its two shares.
struct Response {
  std::uint32_t server_id = 0;
  std::uint32_t point_index = 0;
  Complex point;
  ComplexMatrix product;
};

/// Responses in arrival order. Decoding consumes them front to back.
struct ResponseSet {
  Scheme scheme = Scheme::kMatDot;
  std::vector<Response> responses;

  std::vector<std::uint32_t> responding_servers() const {
    std::vector<std::uint32_t> ids;
    ids.reserve(responses.size());
    for (const Response& r : responses) {
      ids.push_back(r.server_id);
    }
    return ids;
  }
};

/// Which responses the decoder consumes: the first K in arrival order
/// (the recovery-threshold contract), or every response in the set, fit by
/// least squares. The latter matches the figure experiments, where decoding
/// with all non-straggler responses keeps the full-root system unitary.
enum class DecodePolicy { kFirstK, kAllResponses };

/// X mask matrices with i.i.d. circular complex Gaussian entries of complex
/// variance sigma2 (each real component has variance sigma2 / 2).
std::vector<ComplexMatrix> sample_masks(std::size_t rows, std::size_t cols, std::size_t count,
                                        double sigma2, Rng& rng);

/// MatDot share polynomials evaluated at every point:
///   f(x) = sum_j A_j x^{j-1} + sum_k R_k x^{p+k-1}
///   g(x) = sum_j B_j x^{p-j}  + sum_k S_k x^{p+k-1}
/// Evaluation accumulates increasing powers with one running multiplier per
/// point. The NoiseSpec is recorded in the returned set.
ShareSet encode_matdot(const InnerPartition& part, const std::vector<ComplexMatrix>& masks_r,
                       const std::vector<ComplexMatrix>& masks_s, const EvaluationPoints& points,
                       const NoiseSpec& noise);

/// GASP (big) share polynomials:
///   f(x) = sum_j A_j x^{j-1}      + sum_k R_k x^{mn+k-1}
///   g(x) = sum_j B_j x^{m(j-1)}   + sum_k S_k x^{mn+k-1}
ShareSet encode_gasp(const OuterPartition& part, const std::vector<ComplexMatrix>& masks_r,
                     const std::vector<ComplexMatrix>& masks_s, const EvaluationPoints& points,
                     const NoiseSpec& noise);

/// Interpolates h(x) = f(x)g(x) from the responses and extracts the
/// coefficient of x^{p-1}, which equals AB. Throws NotEnoughResponses when
/// fewer than K = 2p + 2X - 1 responses are present.
ComplexMatrix decode_matdot(const ResponseSet& responses, const MatDotParams& params,
                            DecodePolicy policy = DecodePolicy::kFirstK);

/// Interpolates h(x) and assembles the m x n block grid from the first mn
/// coefficients (block (j, j') sits at coefficient m(j'-1) + j - 1).
/// Threshold K = 2mn + 2X - 1.
ComplexMatrix decode_gasp(const ResponseSet& responses, const GaspParams& params,
                          DecodePolicy policy = DecodePolicy::kFirstK);

/// Condition number of the Vandermonde system the given decode would solve.
double decode_condition(const ResponseSet& responses, std::size_t threshold, DecodePolicy policy);

/// Serialized share: share header + two CMAT blocks (A share then B share).
std::vector<std::uint8_t> encode_share(const ShareSet& set, std::size_t idx);
/// Serialized response: share header + one CMAT block.
std::vector<std::uint8_t> encode_response(Scheme scheme, const Response& response);

}  // namespace sdmm
