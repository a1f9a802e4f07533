#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "sdmm/matrix.hpp"

namespace sdmm {

// CMAT container: magic "CMAT", version byte 1, rows and cols as u64
// little-endian, then rows*cols interleaved little-endian doubles (re, im)
// in row-major order. Doubles round-trip bit-for-bit.

inline constexpr std::uint8_t kCmatVersion = 1;

std::vector<std::uint8_t> encode_cmat(const ComplexMatrix& m);
ComplexMatrix decode_cmat(class ByteReader& reader);

void write_cmat(std::ostream& out, const ComplexMatrix& m);
ComplexMatrix read_cmat(std::istream& in);

void save_cmat(const std::filesystem::path& path, const ComplexMatrix& m);
ComplexMatrix load_cmat(const std::filesystem::path& path);

/// Share header prefixed to CMAT blocks when shares and responses are
/// serialized: scheme tag byte (1 = MatDot, 2 = GASP), server id u32,
/// evaluation-point index u32.
struct ShareHeader {
  std::uint8_t scheme_tag = 0;
  std::uint32_t server_id = 0;
  std::uint32_t point_index = 0;

  bool operator==(const ShareHeader&) const = default;
};

void append_share_header(std::vector<std::uint8_t>& out, const ShareHeader& header);
ShareHeader read_share_header(ByteReader& reader);

}  // namespace sdmm
