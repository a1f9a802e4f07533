#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sdmm/bytes.hpp"
#include "sdmm/codec.hpp"
#include "sdmm/linalg.hpp"

using namespace sdmm;

namespace {

ComplexMatrix random_real(std::size_t rows, std::size_t cols, Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (std::size_t e = 0; e < m.size(); ++e) {
    m.data()[e] = Complex(rng.gaussian(), 0.0);
  }
  return m;
}

std::vector<ComplexMatrix> zero_masks(std::size_t rows, std::size_t cols, std::size_t count) {
  return std::vector<ComplexMatrix>(count, ComplexMatrix(rows, cols));
}

// Shares -> responses for a chosen server subset, in the given order.
ResponseSet respond(const ShareSet& shares, const std::vector<std::uint32_t>& servers) {
  ResponseSet set;
  set.scheme = shares.scheme;
  for (std::uint32_t id : servers) {
    const Share& share = shares.shares.at(id - 1);
    Response r;
    r.server_id = share.server_id;
    r.point_index = share.point_index;
    r.point = share.point;
    r.product = matmul(share.a_share, share.b_share);
    set.responses.push_back(std::move(r));
  }
  return set;
}

std::vector<std::uint32_t> all_servers(std::size_t n) {
  std::vector<std::uint32_t> ids(n);
  std::iota(ids.begin(), ids.end(), 1u);
  return ids;
}

ShareSet encode_matdot_job(const ComplexMatrix& a, const ComplexMatrix& b,
                           const MatDotParams& params, double sigma2, std::uint64_t seed) {
  Rng rng(seed);
  const InnerPartition part = split_inner(a, b, params.p);
  const NoiseSpec noise{sigma2, 1.0, 1.0};
  const auto masks_r = sample_masks(part.blocks_a.front().rows(), part.blocks_a.front().cols(),
                                    params.x, sigma2, rng);
  const auto masks_s = sample_masks(part.blocks_b.front().rows(), part.blocks_b.front().cols(),
                                    params.x, sigma2, rng);
  return encode_matdot(part, masks_r, masks_s,
                       EvaluationPoints::roots_of_unity(params.n_servers), noise);
}

ShareSet encode_gasp_job(const ComplexMatrix& a, const ComplexMatrix& b, const GaspParams& params,
                         double sigma2, std::uint64_t seed) {
  Rng rng(seed);
  const OuterPartition part = split_outer(a, b, params.m, params.n);
  const NoiseSpec noise{sigma2, 1.0, 1.0};
  const auto masks_r = sample_masks(part.blocks_a.front().rows(), part.blocks_a.front().cols(),
                                    params.x, sigma2, rng);
  const auto masks_s = sample_masks(part.blocks_b.front().rows(), part.blocks_b.front().cols(),
                                    params.x, sigma2, rng);
  return encode_gasp(part, masks_r, masks_s,
                     EvaluationPoints::roots_of_unity(params.n_servers), noise);
}

}  // namespace

TEST_CASE("sample_masks moments match the circular Gaussian model") {
  Rng rng(100);
  const double sigma2 = 2.0;
  const auto masks = sample_masks(250, 400, 1, sigma2, rng); // 1e5 samples
  double abs2_sum = 0.0;
  Complex square_sum(0.0, 0.0);
  for (const Complex& z : masks[0].entries()) {
    abs2_sum += std::norm(z);
    square_sum += z * z; // non-conjugate second moment, ~0 for circular laws
  }
  const double n = static_cast<double>(masks[0].size());
  const double mean_abs2 = abs2_sum / n;
  CHECK(mean_abs2 > 1.96);
  CHECK(mean_abs2 < 2.04);
  CHECK(std::abs(square_sum / n) <= 0.03);
}

TEST_CASE("sample_masks is deterministic for a fixed seed") {
  Rng rng_a(7), rng_b(7);
  const auto masks_a = sample_masks(4, 5, 3, 0.5, rng_a);
  const auto masks_b = sample_masks(4, 5, 3, 0.5, rng_b);
  REQUIRE(masks_a.size() == masks_b.size());
  for (std::size_t k = 0; k < masks_a.size(); ++k) {
    CHECK(masks_a[k] == masks_b[k]);
  }
}

TEST_CASE("sample_masks rejects non-positive variance") {
  Rng rng(1);
  CHECK_THROWS_AS(sample_masks(2, 2, 1, 0.0, rng), InvalidArgument);
}

TEST_CASE("encode_matdot at alpha = 1 with p = X = 1 adds block and mask") {
  Rng rng(101);
  const ComplexMatrix a = random_real(2, 3, rng);
  const ComplexMatrix b = random_real(3, 2, rng);
  const InnerPartition part = split_inner(a, b, 1);
  Rng mask_rng(5);
  const auto masks_r = sample_masks(2, 3, 1, 1.0, mask_rng);
  const auto masks_s = sample_masks(3, 2, 1, 1.0, mask_rng);
  const auto points = EvaluationPoints::roots_of_unity(3);
  const ShareSet shares = encode_matdot(part, masks_r, masks_s, points, NoiseSpec{});

  // Server 3 evaluates at the third cube root, which is 1.
  const Share& at_one = shares.shares[2];
  CHECK(std::abs(at_one.point - Complex(1.0, 0.0)) < 1e-15);
  CHECK(frobenius_distance(at_one.a_share, a + masks_r[0]) < 1e-14);
  CHECK(frobenius_distance(at_one.b_share, b + masks_s[0]) < 1e-14);
}

TEST_CASE("encode_matdot with zeroed masks matches the polynomial symbolically") {
  Rng rng(102);
  const ComplexMatrix a = random_real(2, 4, rng);
  const ComplexMatrix b = random_real(4, 3, rng);
  const std::size_t p = 2, x = 1, n = 7;
  const InnerPartition part = split_inner(a, b, p);
  const auto points = EvaluationPoints::roots_of_unity(n);
  const ShareSet shares = encode_matdot(part, zero_masks(2, 2, x), zero_masks(2, 3, x), points,
                                        NoiseSpec{});
  for (std::size_t i = 0; i < n; ++i) {
    const Complex alpha = points[i];
    ComplexMatrix expected_a = part.blocks_a[0];
    expected_a.add_scaled(alpha, part.blocks_a[1]);
    CHECK(frobenius_distance(shares.shares[i].a_share, expected_a) < 1e-13);

    ComplexMatrix expected_b = part.blocks_b[1]; // B_2 x^{p-2} = B_2
    expected_b.add_scaled(alpha, part.blocks_b[0]); // B_1 x^{p-1}
    CHECK(frobenius_distance(shares.shares[i].b_share, expected_b) < 1e-13);
  }
}

TEST_CASE("encode rejects mask shape mismatch") {
  Rng rng(103);
  const ComplexMatrix a = random_real(2, 2, rng);
  const ComplexMatrix b = random_real(2, 2, rng);
  const InnerPartition part = split_inner(a, b, 1);
  CHECK_THROWS_AS(encode_matdot(part, zero_masks(3, 3, 1), zero_masks(2, 2, 1),
                                EvaluationPoints::roots_of_unity(3), NoiseSpec{}),
                  DimensionError);
}

TEST_CASE("decode_matdot scalar sanity") {
  const ComplexMatrix a(1, 1, {Complex(1.0, 0.0)});
  const ComplexMatrix b(1, 1, {Complex(1.0, 0.0)});
  const MatDotParams params{1, 1, 3};
  const ShareSet shares = encode_matdot_job(a, b, params, 1.0, 42);
  const ComplexMatrix decoded = decode_matdot(respond(shares, all_servers(3)), params);
  CHECK(std::abs(decoded(0, 0) - Complex(1.0, 0.0)) < 1e-10);
}

TEST_CASE("decode_matdot 36x36 against the matmul oracle") {
  Rng rng(104);
  const ComplexMatrix a = random_real(36, 36, rng);
  const ComplexMatrix b = random_real(36, 36, rng);
  const ComplexMatrix oracle = matmul(a, b);

  // p = 4, X = 3 gives K = 13; run both the N = K case and a larger N
  // where only the first K responses are consumed.
  const MatDotParams tight{4, 3, 13};
  const ShareSet tight_shares = encode_matdot_job(a, b, tight, 1.0, 4242);
  const ComplexMatrix tight_decoded = decode_matdot(respond(tight_shares, all_servers(13)), tight);
  CHECK(relative_frobenius_distance(tight_decoded, oracle) < 1e-9);

  const MatDotParams wide{4, 3, 21};
  const ShareSet wide_shares = encode_matdot_job(a, b, wide, 1.0, 4243);
  const ComplexMatrix wide_decoded = decode_matdot(respond(wide_shares, all_servers(21)), wide);
  CHECK(relative_frobenius_distance(wide_decoded, oracle) < 1e-9);
}

TEST_CASE("decode_matdot needs the full threshold") {
  Rng rng(105);
  const ComplexMatrix a = random_real(4, 4, rng);
  const ComplexMatrix b = random_real(4, 4, rng);
  const MatDotParams params{2, 1, 5};
  const ShareSet shares = encode_matdot_job(a, b, params, 1.0, 7);
  const std::vector<std::uint32_t> short_list{1, 2, 3, 4}; // K - 1 = 4
  CHECK_THROWS_AS(decode_matdot(respond(shares, short_list), params), NotEnoughResponses);
  try {
    decode_matdot(respond(shares, short_list), params);
  } catch (const NotEnoughResponses& e) {
    CHECK(e.got == 4);
    CHECK(e.need == 5);
  }
}

TEST_CASE("decode_gasp trivial and mask-free encodings") {
  Rng rng(106);
  const ComplexMatrix a = random_real(2, 2, rng);
  const ComplexMatrix b = random_real(2, 2, rng);

  const GaspParams params{1, 1, 1, 3};
  const ShareSet shares = encode_gasp_job(a, b, params, 1.0, 9);
  const ComplexMatrix decoded = decode_gasp(respond(shares, all_servers(3)), params);
  CHECK(relative_frobenius_distance(decoded, matmul(a, b)) < 1e-10);

  // Mask-free m = n = 2 at alpha = 1: both shares collapse to block sums.
  const ComplexMatrix a4 = random_real(4, 2, rng);
  const ComplexMatrix b4 = random_real(2, 4, rng);
  const OuterPartition part = split_outer(a4, b4, 2, 2);
  const auto points = EvaluationPoints::roots_of_unity(13);
  const ShareSet mask_free =
      encode_gasp(part, zero_masks(2, 2, 3), zero_masks(2, 2, 3), points, NoiseSpec{});
  const Share& at_one = mask_free.shares[12];
  CHECK(frobenius_distance(at_one.a_share, part.blocks_a[0] + part.blocks_a[1]) < 1e-13);
  CHECK(frobenius_distance(at_one.b_share, part.blocks_b[0] + part.blocks_b[1]) < 1e-13);
}

TEST_CASE("decode_gasp 36x36 against the matmul oracle") {
  Rng rng(107);
  const ComplexMatrix a = random_real(36, 36, rng);
  const ComplexMatrix b = random_real(36, 36, rng);
  const ComplexMatrix oracle = matmul(a, b);

  const GaspParams x3{2, 2, 3, 13}; // K = 2mn + 2X - 1 = 13
  const ShareSet shares_x3 = encode_gasp_job(a, b, x3, 1.0, 11);
  CHECK(relative_frobenius_distance(decode_gasp(respond(shares_x3, all_servers(13)), x3),
                                    oracle) < 1e-9);

  const GaspParams x2{2, 2, 2, 11}; // K = 11
  const ShareSet shares_x2 = encode_gasp_job(a, b, x2, 1.0, 12);
  CHECK(relative_frobenius_distance(decode_gasp(respond(shares_x2, all_servers(11)), x2),
                                    oracle) < 1e-9);
}

TEST_CASE("decode_gasp tolerates dropped stragglers") {
  Rng rng(108);
  const ComplexMatrix a = random_real(36, 36, rng);
  const ComplexMatrix b = random_real(36, 36, rng);
  const ComplexMatrix oracle = matmul(a, b);

  // Large sigma2 so conditioning dominates the error; at sigma2 ~ 1 both
  // cases sit at the machine-noise floor and the comparison is meaningless.
  const GaspParams params{2, 2, 2, 13}; // K = 11, two spare servers
  const ShareSet shares = encode_gasp_job(a, b, params, 1e6, 13);

  // All 13 roots close the circle: the least-squares system is unitary.
  const ComplexMatrix full =
      decode_gasp(respond(shares, all_servers(13)), params, DecodePolicy::kAllResponses);
  const double full_error = relative_frobenius_distance(full, oracle);

  std::vector<std::uint32_t> survivors{1, 2, 3, 5, 6, 7, 9, 10, 11, 12, 13}; // drop 4 and 8
  const ComplexMatrix degraded = decode_gasp(respond(shares, survivors), params);
  const double degraded_error = relative_frobenius_distance(degraded, oracle);

  CHECK(degraded_error < 1e-6);
  CHECK(degraded_error > full_error); // missing roots cost accuracy
}

TEST_CASE("any K-subset decodes within tolerance, subsets agree") {
  Rng rng(109);
  const ComplexMatrix a = random_real(36, 36, rng);
  const ComplexMatrix b = random_real(36, 36, rng);
  const ComplexMatrix oracle = matmul(a, b);

  const MatDotParams params{2, 2, 11}; // K = 7, N = 11
  const std::size_t k = params.threshold();

  for (double sigma2 : {1.0, 1e3}) {
    const ShareSet shares = encode_matdot_job(a, b, params, sigma2, 1000 + (sigma2 > 1.0));
    std::vector<ComplexMatrix> decoded;
    for (int trial = 0; trial < 6; ++trial) {
      std::vector<std::uint32_t> ids = all_servers(params.n_servers);
      for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        std::swap(ids[i], ids[i + rng.uniform_below(ids.size() - i)]);
      }
      ids.resize(k);
      decoded.push_back(decode_matdot(respond(shares, ids), params));
      CHECK(relative_frobenius_distance(decoded.back(), oracle) < 1e-8);
    }
    for (std::size_t i = 1; i < decoded.size(); ++i) {
      CHECK(relative_frobenius_distance(decoded[i], decoded[0]) < 1e-8);
    }
  }
}

TEST_CASE("extreme mask variance still decodes within the loosened tolerance") {
  Rng rng(113);
  const ComplexMatrix a = random_real(36, 36, rng);
  const ComplexMatrix b = random_real(36, 36, rng);
  const ComplexMatrix oracle = matmul(a, b);

  const MatDotParams params{2, 2, 7}; // K = 7 = N
  const ShareSet shares = encode_matdot_job(a, b, params, 1e9, 2025);
  const ComplexMatrix decoded = decode_matdot(respond(shares, all_servers(7)), params);
  CHECK(relative_frobenius_distance(decoded, oracle) < 1e-6);
}

TEST_CASE("zeroed masks decode exactly regardless of subset") {
  Rng rng(110);
  const ComplexMatrix a = random_real(12, 12, rng);
  const ComplexMatrix b = random_real(12, 12, rng);
  const ComplexMatrix oracle = matmul(a, b);

  const std::size_t p = 3, x = 2, n = 13; // K = 9
  const InnerPartition part = split_inner(a, b, p);
  const ShareSet shares = encode_matdot(part, zero_masks(12, 4, x), zero_masks(4, 12, x),
                                        EvaluationPoints::roots_of_unity(n), NoiseSpec{});
  const MatDotParams params{p, x, n};
  for (const auto& subset : {std::vector<std::uint32_t>{1, 2, 3, 4, 5, 6, 7, 8, 9},
                             std::vector<std::uint32_t>{13, 11, 9, 7, 5, 3, 1, 2, 4},
                             std::vector<std::uint32_t>{2, 3, 5, 7, 11, 13, 1, 8, 12}}) {
    const ComplexMatrix decoded = decode_matdot(respond(shares, subset), params);
    CHECK(relative_frobenius_distance(decoded, oracle) < 1e-12);
  }
}

TEST_CASE("share magnitudes grow linearly in sigma") {
  Rng rng(111);
  const ComplexMatrix a = random_real(8, 8, rng);
  const ComplexMatrix b = random_real(8, 8, rng);
  const MatDotParams params{2, 2, 7};

  auto mean_share_magnitude = [&](double sigma2, std::uint64_t seed) {
    const ShareSet shares = encode_matdot_job(a, b, params, sigma2, seed);
    double sum = 0.0;
    std::size_t count = 0;
    for (const Share& s : shares.shares) {
      for (const Complex& z : s.a_share.entries()) {
        sum += std::abs(z);
        ++count;
      }
    }
    return sum / static_cast<double>(count);
  };

  const double at_1e4 = mean_share_magnitude(1e4, 21);
  const double at_1e6 = mean_share_magnitude(1e6, 21);
  // sigma grows 10x; the mask term dominates the data term at both levels.
  CHECK(at_1e6 / at_1e4 == doctest::Approx(10.0).epsilon(0.1));
}

TEST_CASE("share and response serialization carry the header") {
  Rng rng(112);
  const ComplexMatrix a = random_real(2, 2, rng);
  const ComplexMatrix b = random_real(2, 2, rng);
  const MatDotParams params{1, 1, 3};
  const ShareSet shares = encode_matdot_job(a, b, params, 1.0, 77);

  const auto bytes = encode_share(shares, 1);
  ByteReader reader(bytes.data(), bytes.size());
  const ShareHeader header = read_share_header(reader);
  CHECK(header.scheme_tag == 1);
  CHECK(header.server_id == 2);
  CHECK(header.point_index == 2);
  const ComplexMatrix a_share = decode_cmat(reader);
  const ComplexMatrix b_share = decode_cmat(reader);
  CHECK(a_share == shares.shares[1].a_share);
  CHECK(b_share == shares.shares[1].b_share);
  CHECK(reader.remaining() == 0);

  const ResponseSet responses = respond(shares, {2});
  const auto response_bytes = encode_response(shares.scheme, responses.responses[0]);
  ByteReader response_reader(response_bytes.data(), response_bytes.size());
  const ShareHeader response_header = read_share_header(response_reader);
  CHECK(response_header.server_id == 2);
  CHECK(decode_cmat(response_reader) == responses.responses[0].product);
}
