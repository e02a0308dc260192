#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aprl/rollout.hpp"

namespace aprl {

// Framed binary protocol of the rollout fabric. Normative layout, all fields
// little-endian:
//
//   frame    magic "APRP" (4) | u16 version | u8 type | u32 payload_len
//            | payload | u32 crc32c(payload)
//
//   type 1   ClientHello:    u16 protocol_version, u64 client_id,
//                            u32 num_processes, u32 agents_per_process,
//                            u16 obs_layout_version
//   type 2   HelloAccept:    u64 client_id
//   type 3   HelloReject:    u16 reason, u32 text_len, utf-8 text
//   type 4   StepUpload:     u64 client_id, u64 tick, u32 obs_len, u32 count,
//                            count * { u32 agent_index, u64 episode_id,
//                                      f32[obs_len] observation, f32 reward,
//                                      u8 flags }
//   type 5   ActionDownload: u64 client_id, u64 tick, u32 count,
//                            count * { u32 agent_index, f32[5] action,
//                                      f32 log_prob, f32 value }
//   type 6   Bye:            empty
//
// The flags byte carries the episode status in its low 3 bits and the
// waypoint-arrival marker in bit 3 (see env.hpp).
inline constexpr char kWireMagic[4] = {'A', 'P', 'R', 'P'};
inline constexpr std::uint16_t kProtocolVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 4 + 2 + 1 + 4;
inline constexpr std::size_t kFrameTrailerSize = 4;
inline constexpr std::uint32_t kMaxPayloadSize = 64u << 20;

enum class MessageType : std::uint8_t {
  ClientHello = 1,
  HelloAccept = 2,
  HelloReject = 3,
  StepUpload = 4,
  ActionDownload = 5,
  Bye = 6,
};

enum class RejectReason : std::uint16_t {
  ProtocolVersion = 1,
  ObsLayoutVersion = 2,
  DuplicateClientId = 3,
};

struct ClientHello {
  std::uint16_t protocol_version = kProtocolVersion;
  std::uint64_t client_id = 0;
  std::uint32_t num_processes = 1;
  std::uint32_t agents_per_process = 1;
  std::uint16_t obs_layout_version = kObsLayoutVersion;

  bool operator==(const ClientHello&) const = default;
};

struct HelloAccept {
  std::uint64_t client_id = 0;
  bool operator==(const HelloAccept&) const = default;
};

struct HelloReject {
  RejectReason reason = RejectReason::ProtocolVersion;
  std::string text;
  bool operator==(const HelloReject&) const = default;
};

struct StepUpload {
  std::uint64_t client_id = 0;
  std::uint64_t tick = 0;
  std::uint32_t obs_len = kObsVectorSize;
  std::vector<StepRecord> records;
};
bool operator==(const StepUpload& a, const StepUpload& b);

struct ActionDownload {
  std::uint64_t client_id = 0;
  std::uint64_t tick = 0;
  std::vector<ActionRecord> records;
};
bool operator==(const ActionDownload& a, const ActionDownload& b);

struct Bye {
  bool operator==(const Bye&) const = default;
};

using Message =
    std::variant<ClientHello, HelloAccept, HelloReject, StepUpload, ActionDownload, Bye>;

enum class DecodeError {
  None = 0,
  BadMagic,
  ShortFrame,
  UnsupportedVersion,
  UnknownType,
  BadChecksum,
  BadPayload,
};

const char* to_string(DecodeError error);

std::string encode_frame(const Message& message);

struct DecodeResult {
  std::optional<Message> message;
  DecodeError error = DecodeError::None;

  bool ok() const { return error == DecodeError::None; }
};

// Decodes exactly one frame occupying the whole buffer.
DecodeResult decode_frame(std::string_view bytes);

// Header pre-validation for incremental socket reads: checks magic, version,
// type and payload length, and reports the total frame size.
struct FrameInfo {
  MessageType type;
  std::size_t frame_size = 0;  // header + payload + checksum
};
DecodeResult validate_header(std::string_view header, FrameInfo& info);

}  // namespace aprl
