#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdmm/cmat.hpp"
#include "sdmm/matrix.hpp"

namespace sdmm {

// Wire protocol, all integers little-endian:
//   frame   := u32 length | u8 type | u64 task id | payload
//              (length counts everything after the length field)
//   TASK    := share header | CMAT A-share | CMAT B-share
//   RESULT  := CMAT product
//   ERROR   := u16 code | u16 message length | UTF-8 message
// Error codes: 1 malformed frame, 2 shape mismatch, 3 internal.

enum class FrameType : std::uint8_t { kTask = 1, kResult = 2, kError = 3 };

inline constexpr std::uint16_t kErrMalformed = 1;
inline constexpr std::uint16_t kErrShapeMismatch = 2;
inline constexpr std::uint16_t kErrInternal = 3;

inline constexpr std::uint32_t kMaxFrameLength = 1u << 30;

struct Frame {
  FrameType type = FrameType::kTask;
  std::uint64_t task_id = 0;
  std::vector<std::uint8_t> payload;
};

struct TaskPayload {
  ShareHeader header;
  ComplexMatrix a_share;
  ComplexMatrix b_share;
};

struct ErrorPayload {
  std::uint16_t code = 0;
  std::string message;
};

std::vector<std::uint8_t> encode_frame(const Frame& frame);

/// Parses the bytes after the length prefix. Throws ProtocolError on
/// malformed content.
Frame parse_frame_body(const std::uint8_t* data, std::size_t size);

std::vector<std::uint8_t> encode_task_payload(const TaskPayload& task);
TaskPayload parse_task_payload(const std::vector<std::uint8_t>& payload);

std::vector<std::uint8_t> encode_result_payload(const ComplexMatrix& product);
ComplexMatrix parse_result_payload(const std::vector<std::uint8_t>& payload);

std::vector<std::uint8_t> encode_error_payload(std::uint16_t code, const std::string& message);
ErrorPayload parse_error_payload(const std::vector<std::uint8_t>& payload);

}  // namespace sdmm
