#include "sdmm/wire.hpp"

#include "sdmm/bytes.hpp"

namespace sdmm {

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  const std::uint64_t body_length = 1 + 8 + frame.payload.size();
  if (body_length > kMaxFrameLength) {
    throw ProtocolError("frame payload too large", kErrInternal);
  }
  std::vector<std::uint8_t> out;
  out.reserve(4 + body_length);
  append_u32_le(out, static_cast<std::uint32_t>(body_length));
  append_u8(out, static_cast<std::uint8_t>(frame.type));
  append_u64_le(out, frame.task_id);
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

Frame parse_frame_body(const std::uint8_t* data, std::size_t size) {
  ByteReader reader(data, size);
  Frame frame;
  const std::uint8_t type = reader.read_u8();
  if (type < 1 || type > 3) {
    throw ProtocolError("unknown frame type " + std::to_string(type), kErrMalformed);
  }
  frame.type = static_cast<FrameType>(type);
  frame.task_id = reader.read_u64_le();
  frame.payload.resize(reader.remaining());
  if (!frame.payload.empty()) {
    reader.read_bytes(frame.payload.data(), frame.payload.size());
  }
  return frame;
}

std::vector<std::uint8_t> encode_task_payload(const TaskPayload& task) {
  std::vector<std::uint8_t> out;
  append_share_header(out, task.header);
  const auto a = encode_cmat(task.a_share);
  const auto b = encode_cmat(task.b_share);
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

TaskPayload parse_task_payload(const std::vector<std::uint8_t>& payload) {
  ByteReader reader(payload.data(), payload.size());
  TaskPayload task;
  try {
    task.header = read_share_header(reader);
    task.a_share = decode_cmat(reader);
    task.b_share = decode_cmat(reader);
  } catch (const Error& e) {
    throw ProtocolError(std::string("malformed TASK payload: ") + e.what(), kErrMalformed);
  }
  if (reader.remaining() != 0) {
    throw ProtocolError("trailing bytes after TASK payload", kErrMalformed);
  }
  return task;
}

std::vector<std::uint8_t> encode_result_payload(const ComplexMatrix& product) {
  return encode_cmat(product);
}

ComplexMatrix parse_result_payload(const std::vector<std::uint8_t>& payload) {
  ByteReader reader(payload.data(), payload.size());
  try {
    return decode_cmat(reader);
  } catch (const Error& e) {
    throw ProtocolError(std::string("malformed RESULT payload: ") + e.what(), kErrMalformed);
  }
}

std::vector<std::uint8_t> encode_error_payload(std::uint16_t code, const std::string& message) {
  std::vector<std::uint8_t> out;
  append_u16_le(out, code);
  const std::uint16_t len =
      static_cast<std::uint16_t>(std::min<std::size_t>(message.size(), 0xffff));
  append_u16_le(out, len);
  out.insert(out.end(), message.begin(), message.begin() + len);
  return out;
}

ErrorPayload parse_error_payload(const std::vector<std::uint8_t>& payload) {
  ByteReader reader(payload.data(), payload.size());
  ErrorPayload err;
  err.code = reader.read_u16_le();
  const std::uint16_t len = reader.read_u16_le();
  err.message.resize(len);
  if (len > 0) {
    reader.read_bytes(err.message.data(), len);
  }
  return err;
}

}  // namespace sdmm
