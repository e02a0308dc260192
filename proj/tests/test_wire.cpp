#include <doctest.h>

#include <cstring>

#include "aprl/crc32c.hpp"
#include "aprl/rng.hpp"
#include "aprl/wire.hpp"

using namespace aprl;

namespace {

StepUpload random_upload(Rng& rng, std::uint32_t obs_len) {
  StepUpload m;
  m.client_id = rng.next_u64();
  m.tick = rng.uniform_index(1 << 20);
  m.obs_len = obs_len;
  const int count = static_cast<int>(rng.uniform_index(6));
  for (int i = 0; i < count; ++i) {
    StepRecord r;
    r.agent_index = static_cast<std::uint32_t>(i);
    r.episode_id = rng.next_u64();
    r.observation.resize(obs_len);
    for (float& v : r.observation) v = static_cast<float>(rng.uniform(-1, 1));
    r.reward = static_cast<float>(rng.uniform(-5, 5));
    r.flags = static_cast<std::uint8_t>(rng.uniform_index(16));
    m.records.push_back(std::move(r));
  }
  return m;
}

ActionDownload random_download(Rng& rng) {
  ActionDownload m;
  m.client_id = rng.next_u64();
  m.tick = rng.uniform_index(1 << 20);
  const int count = static_cast<int>(rng.uniform_index(6));
  for (int i = 0; i < count; ++i) {
    ActionRecord r;
    r.agent_index = static_cast<std::uint32_t>(i);
    for (float& v : r.action) v = static_cast<float>(rng.uniform(-2, 2));
    r.log_prob = static_cast<float>(rng.uniform(-20, 0));
    r.value = static_cast<float>(rng.uniform(-3, 3));
    m.records.push_back(r);
  }
  return m;
}

Message random_message(Rng& rng) {
  switch (rng.uniform_index(6)) {
    case 0: {
      ClientHello m;
      m.client_id = rng.next_u64();
      m.num_processes = static_cast<std::uint32_t>(1 + rng.uniform_index(10));
      m.agents_per_process = static_cast<std::uint32_t>(1 + rng.uniform_index(50));
      return m;
    }
    case 1: return HelloAccept{rng.next_u64()};
    case 2: return HelloReject{RejectReason::ObsLayoutVersion, "layout mismatch"};
    case 3: return random_upload(rng, 72);
    case 4: return random_download(rng);
    default: return Bye{};
  }
}

bool messages_equal(const Message& a, const Message& b) {
  return a == b;  // variant equality via per-type operator==
}

}  // namespace

TEST_CASE("encode/decode identity over randomized messages") {
  Rng rng(404);
  for (int i = 0; i < 2000; ++i) {
    const Message original = random_message(rng);
    const std::string frame = encode_frame(original);
    const DecodeResult decoded = decode_frame(frame);
    REQUIRE(decoded.ok());
    REQUIRE(messages_equal(*decoded.message, original));
  }
}

TEST_CASE("empty per-agent list encodes to a valid frame") {
  StepUpload upload;
  upload.client_id = 9;
  upload.tick = 3;
  const DecodeResult decoded = decode_frame(encode_frame(upload));
  REQUIRE(decoded.ok());
  CHECK(std::get<StepUpload>(*decoded.message).records.empty());
}

TEST_CASE("corruption classes map to distinct decode errors") {
  Rng rng(405);
  const std::string frame = encode_frame(random_upload(rng, 72));

  SUBCASE("flipped payload bit fails the checksum") {
    std::string bad = frame;
    bad[kFrameHeaderSize + 3] ^= 0x10;
    CHECK(decode_frame(bad).error == DecodeError::BadChecksum);
  }
  SUBCASE("flipped checksum bit fails the checksum") {
    std::string bad = frame;
    bad[bad.size() - 1] ^= 0x01;
    CHECK(decode_frame(bad).error == DecodeError::BadChecksum);
  }
  SUBCASE("bad magic") {
    std::string bad = frame;
    bad[0] = 'Z';
    CHECK(decode_frame(bad).error == DecodeError::BadMagic);
  }
  SUBCASE("short frame") {
    CHECK(decode_frame(frame.substr(0, 5)).error == DecodeError::ShortFrame);
    CHECK(decode_frame(frame.substr(0, frame.size() - 3)).error == DecodeError::ShortFrame);
  }
  SUBCASE("unknown message type") {
    std::string bad = frame;
    bad[6] = 42;
    CHECK(decode_frame(bad).error == DecodeError::UnknownType);
  }
  SUBCASE("unsupported version") {
    std::string bad = frame;
    bad[4] = 9;
    CHECK(decode_frame(bad).error == DecodeError::UnsupportedVersion);
  }
  SUBCASE("declared payload longer than the body") {
    std::string bad = frame;
    bad[7] = static_cast<char>(bad[7] + 1);
    CHECK(decode_frame(bad).error == DecodeError::ShortFrame);
  }
}

TEST_CASE("truncated payload inside a record is rejected") {
  // craft a frame whose payload claims more records than it carries, with a
  // valid checksum over the truncated payload
  StepUpload upload;
  upload.obs_len = 4;
  StepRecord r;
  r.observation.assign(4, 0.5f);
  upload.records.push_back(r);
  std::string frame = encode_frame(upload);
  // bump the record count field inside the payload (client_id + tick + obs_len)
  const std::size_t count_pos = kFrameHeaderSize + 8 + 8 + 4;
  frame[count_pos] = 2;
  // reseal checksum
  const std::size_t payload_len = frame.size() - kFrameHeaderSize - kFrameTrailerSize;
  const std::uint32_t crc = crc32c(frame.data() + kFrameHeaderSize, payload_len);
  std::memcpy(frame.data() + frame.size() - 4, &crc, 4);
  CHECK(decode_frame(frame).error == DecodeError::BadPayload);
}
