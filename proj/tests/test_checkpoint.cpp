#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>

#include "aprl/checkpoint.hpp"
#include "aprl/crc32c.hpp"

using namespace aprl;

namespace {

PolicyModel<float> random_model(std::uint64_t seed) {
  Rng rng(seed);
  auto m = make_policy_model<float>(24, {16, 8}, 5, rng);
  m.mode = ControlMode::ZeroG;
  for (auto& ls : m.log_sigma) ls = static_cast<float>(rng.uniform(-2.0, 0.5));
  return m;
}

std::string patch_crc(std::string bytes) {
  const std::uint32_t crc = crc32c(bytes.data() + 4, bytes.size() - 8);
  std::memcpy(bytes.data() + bytes.size() - 4, &crc, 4);
  return bytes;
}

}  // namespace

TEST_CASE("serialize/deserialize round trip is forward-equivalent bit-exactly") {
  const auto m = random_model(8);
  const auto restored = deserialize_model(serialize_model(m));
  CHECK(restored.mode == m.mode);
  CHECK(restored.obs_layout_version == m.obs_layout_version);
  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    std::vector<float> obs(24);
    for (float& v : obs) v = static_cast<float>(rng.uniform(-1, 1));
    const auto a = forward(m, obs);
    const auto b = forward(restored, obs);
    REQUIRE(a.mu == b.mu);
    REQUIRE(a.value == b.value);
    REQUIRE(a.sigma == b.sigma);
  }
}

TEST_CASE("serialization is byte-stable") {
  const auto m = random_model(3);
  CHECK(serialize_model(m) == serialize_model(m));
}

TEST_CASE("stripping the value head shrinks the file but keeps mu") {
  const auto m = random_model(4);
  const std::string full = serialize_model(m, false);
  const std::string stripped = serialize_model(m, true);
  CHECK(stripped.size() < full.size());
  const auto restored = deserialize_model(stripped);
  std::vector<float> obs(24, 0.25f);
  CHECK(forward(restored, obs).mu == forward(m, obs).mu);
}

TEST_CASE("every corrupted byte is rejected by the checksum") {
  const auto m = random_model(5);
  const std::string bytes = serialize_model(m);
  // flip a byte in a few representative places (header, weights, tail)
  for (std::size_t pos : {std::size_t{6}, bytes.size() / 2, bytes.size() - 9}) {
    std::string bad = bytes;
    bad[pos] = static_cast<char>(bad[pos] ^ 0x40);
    CHECK_THROWS_AS(deserialize_model(bad), ModelChecksumError);
  }
}

TEST_CASE("bad magic is its own failure") {
  const auto m = random_model(5);
  std::string bad = serialize_model(m);
  bad[0] = 'X';
  CHECK_THROWS_AS(deserialize_model(bad), ModelIoError);
  CHECK_THROWS_WITH(deserialize_model(bad), doctest::Contains("magic"));
}

TEST_CASE("unsupported format version is a version error, not a misread") {
  const auto m = random_model(6);
  std::string bytes = serialize_model(m);
  const std::uint16_t old_version = 0;
  std::memcpy(bytes.data() + 4, &old_version, 2);
  bytes = patch_crc(std::move(bytes));  // valid checksum, wrong version
  CHECK_THROWS_AS(deserialize_model(bytes), ModelVersionError);
}

TEST_CASE("internally truncated payload is a truncation error") {
  const auto m = random_model(7);
  std::string bytes = serialize_model(m);
  // chop a chunk out of the middle and re-seal the checksum
  bytes.erase(bytes.size() / 2, 32);
  bytes = patch_crc(std::move(bytes));
  CHECK_THROWS_AS(deserialize_model(bytes), ModelIoError);

  // plain truncation loses the checksum and fails fast
  std::string cut = serialize_model(m);
  cut.resize(cut.size() / 2);
  CHECK_THROWS_AS(deserialize_model(cut), ModelIoError);
  CHECK_THROWS_AS(deserialize_model(std::string("APM")), ModelTruncationError);
}

TEST_CASE("file round trip") {
  const auto m = random_model(11);
  const std::string path =
      (std::filesystem::temp_directory_path() / "aprl_ckpt_test.apml").string();
  save_checkpoint(m, path);
  const auto restored = load_checkpoint(path);
  std::vector<float> obs(24, -0.5f);
  CHECK(forward(restored, obs).mu == forward(m, obs).mu);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
}
