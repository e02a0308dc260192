#include "aprl/wire.hpp"

#include <bit>
#include <cstring>

#include "aprl/crc32c.hpp"

// the layout is defined little-endian; this implementation reads fields with
// memcpy and therefore requires a little-endian host
static_assert(std::endian::native == std::endian::little);

namespace aprl {

bool operator==(const StepUpload& a, const StepUpload& b) {
  if (a.client_id != b.client_id || a.tick != b.tick || a.obs_len != b.obs_len ||
      a.records.size() != b.records.size())
    return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const StepRecord& x = a.records[i];
    const StepRecord& y = b.records[i];
    if (x.agent_index != y.agent_index || x.episode_id != y.episode_id ||
        x.observation != y.observation || x.reward != y.reward || x.flags != y.flags)
      return false;
  }
  return true;
}

bool operator==(const ActionDownload& a, const ActionDownload& b) {
  if (a.client_id != b.client_id || a.tick != b.tick ||
      a.records.size() != b.records.size())
    return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const ActionRecord& x = a.records[i];
    const ActionRecord& y = b.records[i];
    if (x.agent_index != y.agent_index || x.action != y.action ||
        x.log_prob != y.log_prob || x.value != y.value)
      return false;
  }
  return true;
}

const char* to_string(DecodeError error) {
  switch (error) {
    case DecodeError::None: return "ok";
    case DecodeError::BadMagic: return "bad magic";
    case DecodeError::ShortFrame: return "short frame";
    case DecodeError::UnsupportedVersion: return "unsupported version";
    case DecodeError::UnknownType: return "unknown message type";
    case DecodeError::BadChecksum: return "checksum mismatch";
    case DecodeError::BadPayload: return "malformed payload";
  }
  return "?";
}

namespace {

void put_bytes(std::string& out, const void* p, std::size_t n) {
  out.append(static_cast<const char*>(p), n);
}

template <typename T>
void put(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  put_bytes(out, &v, sizeof(v));
}

class PayloadReader {
 public:
  explicit PayloadReader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  bool get(T& out) {
    if (pos_ + sizeof(T) > bytes_.size()) return false;
    std::memcpy(&out, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return true;
  }

  bool get_floats(float* out, std::size_t n) {
    const std::size_t bytes = n * sizeof(float);
    if (pos_ + bytes > bytes_.size()) return false;
    std::memcpy(out, bytes_.data() + pos_, bytes);
    pos_ += bytes;
    return true;
  }

  bool get_string(std::string& out, std::size_t n) {
    if (pos_ + n > bytes_.size()) return false;
    out.assign(bytes_.data() + pos_, n);
    pos_ += n;
    return true;
  }

  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string encode_payload(const Message& message, MessageType& type) {
  std::string p;
  if (const auto* hello = std::get_if<ClientHello>(&message)) {
    type = MessageType::ClientHello;
    put(p, hello->protocol_version);
    put(p, hello->client_id);
    put(p, hello->num_processes);
    put(p, hello->agents_per_process);
    put(p, hello->obs_layout_version);
  } else if (const auto* accept = std::get_if<HelloAccept>(&message)) {
    type = MessageType::HelloAccept;
    put(p, accept->client_id);
  } else if (const auto* reject = std::get_if<HelloReject>(&message)) {
    type = MessageType::HelloReject;
    put(p, static_cast<std::uint16_t>(reject->reason));
    put(p, static_cast<std::uint32_t>(reject->text.size()));
    put_bytes(p, reject->text.data(), reject->text.size());
  } else if (const auto* upload = std::get_if<StepUpload>(&message)) {
    type = MessageType::StepUpload;
    put(p, upload->client_id);
    put(p, upload->tick);
    put(p, upload->obs_len);
    put(p, static_cast<std::uint32_t>(upload->records.size()));
    for (const StepRecord& r : upload->records) {
      put(p, r.agent_index);
      put(p, r.episode_id);
      put_bytes(p, r.observation.data(), r.observation.size() * sizeof(float));
      put(p, r.reward);
      put(p, r.flags);
    }
  } else if (const auto* download = std::get_if<ActionDownload>(&message)) {
    type = MessageType::ActionDownload;
    put(p, download->client_id);
    put(p, download->tick);
    put(p, static_cast<std::uint32_t>(download->records.size()));
    for (const ActionRecord& r : download->records) {
      put(p, r.agent_index);
      put_bytes(p, r.action.data(), r.action.size() * sizeof(float));
      put(p, r.log_prob);
      put(p, r.value);
    }
  } else {
    type = MessageType::Bye;
  }
  return p;
}

bool decode_payload(MessageType type, std::string_view payload, Message& out) {
  PayloadReader r(payload);
  switch (type) {
    case MessageType::ClientHello: {
      ClientHello m;
      if (!r.get(m.protocol_version) || !r.get(m.client_id) || !r.get(m.num_processes) ||
          !r.get(m.agents_per_process) || !r.get(m.obs_layout_version))
        return false;
      out = m;
      break;
    }
    case MessageType::HelloAccept: {
      HelloAccept m;
      if (!r.get(m.client_id)) return false;
      out = m;
      break;
    }
    case MessageType::HelloReject: {
      HelloReject m;
      std::uint16_t reason;
      std::uint32_t len;
      if (!r.get(reason) || !r.get(len) || !r.get_string(m.text, len)) return false;
      m.reason = static_cast<RejectReason>(reason);
      out = std::move(m);
      break;
    }
    case MessageType::StepUpload: {
      StepUpload m;
      std::uint32_t count;
      if (!r.get(m.client_id) || !r.get(m.tick) || !r.get(m.obs_len) || !r.get(count))
        return false;
      if (m.obs_len > 65536) return false;
      m.records.reserve(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        StepRecord rec;
        rec.observation.resize(m.obs_len);
        if (!r.get(rec.agent_index) || !r.get(rec.episode_id) ||
            !r.get_floats(rec.observation.data(), m.obs_len) || !r.get(rec.reward) ||
            !r.get(rec.flags))
          return false;
        m.records.push_back(std::move(rec));
      }
      out = std::move(m);
      break;
    }
    case MessageType::ActionDownload: {
      ActionDownload m;
      std::uint32_t count;
      if (!r.get(m.client_id) || !r.get(m.tick) || !r.get(count)) return false;
      m.records.reserve(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        ActionRecord rec;
        if (!r.get(rec.agent_index) ||
            !r.get_floats(rec.action.data(), rec.action.size()) ||
            !r.get(rec.log_prob) || !r.get(rec.value))
          return false;
        m.records.push_back(rec);
      }
      out = std::move(m);
      break;
    }
    case MessageType::Bye:
      out = Bye{};
      break;
    default:
      return false;
  }
  return r.exhausted();
}

bool known_type(std::uint8_t raw) {
  return raw >= static_cast<std::uint8_t>(MessageType::ClientHello) &&
         raw <= static_cast<std::uint8_t>(MessageType::Bye);
}

}  // namespace

std::string encode_frame(const Message& message) {
  MessageType type{};
  const std::string payload = encode_payload(message, type);
  std::string out;
  out.reserve(kFrameHeaderSize + payload.size() + kFrameTrailerSize);
  put_bytes(out, kWireMagic, sizeof(kWireMagic));
  put(out, kProtocolVersion);
  put(out, static_cast<std::uint8_t>(type));
  put(out, static_cast<std::uint32_t>(payload.size()));
  put_bytes(out, payload.data(), payload.size());
  put(out, crc32c(payload.data(), payload.size()));
  return out;
}

DecodeResult validate_header(std::string_view header, FrameInfo& info) {
  if (header.size() < kFrameHeaderSize) return {std::nullopt, DecodeError::ShortFrame};
  if (std::memcmp(header.data(), kWireMagic, sizeof(kWireMagic)) != 0)
    return {std::nullopt, DecodeError::BadMagic};
  std::uint16_t version;
  std::memcpy(&version, header.data() + 4, 2);
  if (version != kProtocolVersion) return {std::nullopt, DecodeError::UnsupportedVersion};
  const std::uint8_t raw_type = static_cast<std::uint8_t>(header[6]);
  if (!known_type(raw_type)) return {std::nullopt, DecodeError::UnknownType};
  std::uint32_t payload_len;
  std::memcpy(&payload_len, header.data() + 7, 4);
  if (payload_len > kMaxPayloadSize) return {std::nullopt, DecodeError::BadPayload};
  info.type = static_cast<MessageType>(raw_type);
  info.frame_size = kFrameHeaderSize + payload_len + kFrameTrailerSize;
  return {std::nullopt, DecodeError::None};
}

DecodeResult decode_frame(std::string_view bytes) {
  FrameInfo info;
  const DecodeResult header = validate_header(bytes, info);
  if (header.error != DecodeError::None) return header;
  if (bytes.size() != info.frame_size) return {std::nullopt, DecodeError::ShortFrame};

  const std::string_view payload =
      bytes.substr(kFrameHeaderSize, info.frame_size - kFrameHeaderSize - kFrameTrailerSize);
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + bytes.size() - 4, 4);
  if (stored_crc != crc32c(payload.data(), payload.size()))
    return {std::nullopt, DecodeError::BadChecksum};

  Message message;
  if (!decode_payload(info.type, payload, message))
    return {std::nullopt, DecodeError::BadPayload};
  return {std::move(message), DecodeError::None};
}

}  // namespace aprl
