#include "sdmm/cmat.hpp"

#include <fstream>
#include <ostream>

#include "sdmm/bytes.hpp"

namespace sdmm {

namespace {
constexpr char kMagic[4] = {'C', 'M', 'A', 'T'};
}

std::vector<std::uint8_t> encode_cmat(const ComplexMatrix& m) {
  std::vector<std::uint8_t> out;
  out.reserve(13 + 16 * m.size());
  for (char c : kMagic) {
    out.push_back(static_cast<std::uint8_t>(c));
  }
  append_u8(out, kCmatVersion);
  append_u64_le(out, m.rows());
  append_u64_le(out, m.cols());
  for (const Complex& z : m.entries()) {
    append_f64_le(out, z.real());
    append_f64_le(out, z.imag());
  }
  return out;
}

ComplexMatrix decode_cmat(ByteReader& reader) {
  char magic[4];
  reader.read_bytes(magic, 4);
  if (magic[0] != 'C' || magic[1] != 'M' || magic[2] != 'A' || magic[3] != 'T') {
    throw IoError("bad CMAT magic");
  }
  const std::uint8_t version = reader.read_u8();
  if (version != kCmatVersion) {
    throw IoError("unsupported CMAT version " + std::to_string(version));
  }
  const std::uint64_t rows = reader.read_u64_le();
  const std::uint64_t cols = reader.read_u64_le();
  // Division form avoids u64 overflow on hostile headers.
  if (rows != 0 && cols != 0 && (reader.remaining() / 16) / rows < cols) {
    throw IoError("CMAT payload shorter than declared shape");
  }
  std::vector<Complex> entries;
  entries.reserve(rows * cols);
  for (std::uint64_t k = 0; k < rows * cols; ++k) {
    const double re = reader.read_f64_le();
    const double im = reader.read_f64_le();
    entries.emplace_back(re, im);
  }
  return ComplexMatrix(rows, cols, std::move(entries));
}

void write_cmat(std::ostream& out, const ComplexMatrix& m) {
  const auto bytes = encode_cmat(m);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("failed to write CMAT stream");
  }
}

ComplexMatrix read_cmat(std::istream& in) {
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  ByteReader reader(bytes.data(), bytes.size());
  return decode_cmat(reader);
}

void save_cmat(const std::filesystem::path& path, const ComplexMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  write_cmat(out, m);
}

ComplexMatrix load_cmat(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading");
  }
  return read_cmat(in);
}

void append_share_header(std::vector<std::uint8_t>& out, const ShareHeader& header) {
  append_u8(out, header.scheme_tag);
  append_u32_le(out, header.server_id);
  append_u32_le(out, header.point_index);
}

ShareHeader read_share_header(ByteReader& reader) {
  ShareHeader h;
  h.scheme_tag = reader.read_u8();
  h.server_id = reader.read_u32_le();
  h.point_index = reader.read_u32_le();
  return h;
}

}  // namespace sdmm
