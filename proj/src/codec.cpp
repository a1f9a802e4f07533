#include "sdmm/codec.hpp"

#include <algorithm>
#include <utility>

#include "sdmm/bytes.hpp"
#include "sdmm/linalg.hpp"

namespace sdmm {

std::vector<ComplexMatrix> sample_masks(std::size_t rows, std::size_t cols, std::size_t count,
                                        double sigma2, Rng& rng) {
  if (!(sigma2 > 0.0)) {
    throw InvalidArgument("mask variance sigma2 must be positive");
  }
  std::vector<ComplexMatrix> masks;
  masks.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    ComplexMatrix m(rows, cols);
    for (std::size_t e = 0; e < m.size(); ++e) {
      m.data()[e] = rng.circular_gaussian(sigma2);
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

namespace {

// Evaluates sum_t coeffs[t].matrix * alpha^{coeffs[t].exponent} for one
// point, walking a single running power through the (sorted) exponent list.
struct Term {
  std::size_t exponent;
  const ComplexMatrix* block;
};

ComplexMatrix evaluate_terms(const std::vector<Term>& terms, Complex alpha) {
  ComplexMatrix acc(terms.front().block->rows(), terms.front().block->cols());
  Complex power(1.0, 0.0);
  std::size_t current = 0;
  for (const Term& term : terms) {
    while (current < term.exponent) {
      power *= alpha;
      ++current;
    }
    acc.add_scaled(power, *term.block);
  }
  return acc;
}

std::vector<Term> make_terms(const std::vector<const ComplexMatrix*>& data_blocks,
                             const std::vector<std::size_t>& data_exponents,
                             const std::vector<ComplexMatrix>& masks,
                             std::size_t first_noise_exponent) {
  std::vector<Term> terms;
  terms.reserve(data_blocks.size() + masks.size());
  for (std::size_t j = 0; j < data_blocks.size(); ++j) {
    terms.push_back(Term{data_exponents[j], data_blocks[j]});
  }
  for (std::size_t k = 0; k < masks.size(); ++k) {
    terms.push_back(Term{first_noise_exponent + k, &masks[k]});
  }
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.exponent < b.exponent; });
  return terms;
}

void check_mask_shapes(const std::vector<ComplexMatrix>& masks, const ComplexMatrix& block,
                       const char* side) {
  for (const ComplexMatrix& m : masks) {
    if (!m.same_shape(block)) {
      throw DimensionError(std::string("mask shape does not match ") + side + " block shape",
                           m.rows(), m.cols(), block.rows(), block.cols());
    }
  }
}

ShareSet encode_with_exponents(Scheme scheme, const std::vector<const ComplexMatrix*>& blocks_a,
                               const std::vector<std::size_t>& exps_a,
                               const std::vector<const ComplexMatrix*>& blocks_b,
                               const std::vector<std::size_t>& exps_b,
                               const std::vector<ComplexMatrix>& masks_r,
                               const std::vector<ComplexMatrix>& masks_s,
                               std::size_t noise_exponent_base, const EvaluationPoints& points,
                               const NoiseSpec& noise) {
  const auto terms_a = make_terms(blocks_a, exps_a, masks_r, noise_exponent_base);
  const auto terms_b = make_terms(blocks_b, exps_b, masks_s, noise_exponent_base);

  ShareSet set;
  set.scheme = scheme;
  set.noise = noise;
  set.shares.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    Share share;
    share.server_id = static_cast<std::uint32_t>(i + 1);
    share.point_index = static_cast<std::uint32_t>(i + 1);
    share.point = points[i];
    share.a_share = evaluate_terms(terms_a, points[i]);
    share.b_share = evaluate_terms(terms_b, points[i]);
    set.shares.push_back(std::move(share));
  }
  return set;
}

}  // namespace

ShareSet encode_matdot(const InnerPartition& part, const std::vector<ComplexMatrix>& masks_r,
                       const std::vector<ComplexMatrix>& masks_s, const EvaluationPoints& points,
                       const NoiseSpec& noise) {
  const std::size_t p = part.p();
  if (p == 0 || part.blocks_b.size() != p) {
    throw InvalidArgument("MatDot partition must have p matching A and B block counts");
  }
  if (masks_r.empty() || masks_r.size() != masks_s.size()) {
    throw InvalidArgument("MatDot needs X >= 1 masks on both sides");
  }
  check_mask_shapes(masks_r, part.blocks_a.front(), "A");
  check_mask_shapes(masks_s, part.blocks_b.front(), "B");

  std::vector<const ComplexMatrix*> blocks_a, blocks_b;
  std::vector<std::size_t> exps_a, exps_b;
  for (std::size_t j = 0; j < p; ++j) {
    blocks_a.push_back(&part.blocks_a[j]);
    exps_a.push_back(j); // A_j at x^{j-1}, 1-based j
    blocks_b.push_back(&part.blocks_b[j]);
    exps_b.push_back(p - 1 - j); // B_j' at x^{p-j'}
  }
  return encode_with_exponents(Scheme::kMatDot, blocks_a, exps_a, blocks_b, exps_b, masks_r,
                               masks_s, p, points, noise);
}

ShareSet encode_gasp(const OuterPartition& part, const std::vector<ComplexMatrix>& masks_r,
                     const std::vector<ComplexMatrix>& masks_s, const EvaluationPoints& points,
                     const NoiseSpec& noise) {
  const std::size_t m = part.m();
  const std::size_t n = part.n();
  if (m == 0 || n == 0) {
    throw InvalidArgument("GASP partition must be non-empty on both sides");
  }
  if (masks_r.empty() || masks_r.size() != masks_s.size()) {
    throw InvalidArgument("GASP needs X >= 1 masks on both sides");
  }
  check_mask_shapes(masks_r, part.blocks_a.front(), "A");
  check_mask_shapes(masks_s, part.blocks_b.front(), "B");

  std::vector<const ComplexMatrix*> blocks_a, blocks_b;
  std::vector<std::size_t> exps_a, exps_b;
  for (std::size_t j = 0; j < m; ++j) {
    blocks_a.push_back(&part.blocks_a[j]);
    exps_a.push_back(j); // A_j at x^{j-1}
  }
  for (std::size_t j = 0; j < n; ++j) {
    blocks_b.push_back(&part.blocks_b[j]);
    exps_b.push_back(m * j); // B_j' at x^{m(j'-1)}
  }
  return encode_with_exponents(Scheme::kGasp, blocks_a, exps_a, blocks_b, exps_b, masks_r, masks_s,
                               m * n, points, noise);
}

namespace {

// Interpolation coefficients for the first `threshold` responses (or all of
// them under kAllResponses, fit by least squares).
std::vector<ComplexMatrix> interpolate_responses(const ResponseSet& responses,
                                                 std::size_t threshold, DecodePolicy policy) {
  if (responses.responses.size() < threshold) {
    throw NotEnoughResponses(responses.responses.size(), threshold);
  }
  const std::size_t used = policy == DecodePolicy::kFirstK
                               ? threshold
                               : responses.responses.size();
  std::vector<Complex> points;
  std::vector<ComplexMatrix> values;
  points.reserve(used);
  values.reserve(used);
  for (std::size_t i = 0; i < used; ++i) {
    points.push_back(responses.responses[i].point);
    values.push_back(responses.responses[i].product);
  }
  return solve_vandermonde(points, values, threshold);
}

}  // namespace

ComplexMatrix decode_matdot(const ResponseSet& responses, const MatDotParams& params,
                            DecodePolicy policy) {
  params.validate();
  auto coefficients = interpolate_responses(responses, params.threshold(), policy);
  // h(x) = f(x)g(x) carries sum_j A_j B_j at x^{p-1}; everything else is
  // data/noise cross terms that the scheme discards.
  return std::move(coefficients[params.p - 1]);
}

ComplexMatrix decode_gasp(const ResponseSet& responses, const GaspParams& params,
                          DecodePolicy policy) {
  params.validate();
  auto coefficients = interpolate_responses(responses, params.threshold(), policy);
  std::vector<std::vector<ComplexMatrix>> grid(params.m);
  for (std::size_t j = 0; j < params.m; ++j) {
    grid[j].reserve(params.n);
    for (std::size_t jq = 0; jq < params.n; ++jq) {
      grid[j].push_back(std::move(coefficients[params.m * jq + j]));
    }
  }
  return assemble_outer(grid);
}

double decode_condition(const ResponseSet& responses, std::size_t threshold,
                        DecodePolicy policy) {
  if (responses.responses.size() < threshold) {
    throw NotEnoughResponses(responses.responses.size(), threshold);
  }
  const std::size_t used =
      policy == DecodePolicy::kFirstK ? threshold : responses.responses.size();
  std::vector<Complex> points;
  points.reserve(used);
  for (std::size_t i = 0; i < used; ++i) {
    points.push_back(responses.responses[i].point);
  }
  return spectral_condition(vandermonde(points, threshold));
}

std::vector<std::uint8_t> encode_share(const ShareSet& set, std::size_t idx) {
  const Share& share = set.shares.at(idx);
  std::vector<std::uint8_t> out;
  append_share_header(out, set.header_for(idx));
  const auto a_bytes = encode_cmat(share.a_share);
  const auto b_bytes = encode_cmat(share.b_share);
  out.insert(out.end(), a_bytes.begin(), a_bytes.end());
  out.insert(out.end(), b_bytes.begin(), b_bytes.end());
  return out;
}

std::vector<std::uint8_t> encode_response(Scheme scheme, const Response& response) {
  std::vector<std::uint8_t> out;
  append_share_header(
      out, ShareHeader{static_cast<std::uint8_t>(scheme), response.server_id,
                       response.point_index});
  const auto bytes = encode_cmat(response.product);
  out.insert(out.end(), bytes.begin(), bytes.end());
  return out;
}

}  // namespace sdmm
