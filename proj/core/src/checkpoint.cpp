#include "aprl/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "aprl/crc32c.hpp"

namespace aprl {

namespace {

void put_bytes(std::string& out, const void* p, std::size_t n) {
  out.append(static_cast<const char*>(p), n);
}

template <typename T>
void put(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  put_bytes(out, &v, sizeof(v));
}

void put_linear(std::string& out, const Linear<float>& l) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(l.weight.rows));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(l.weight.cols));
  put_bytes(out, l.weight.data.data(), l.weight.data.size() * sizeof(float));
  put_bytes(out, l.bias.data(), l.bias.size() * sizeof(float));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  template <typename T>
  T get() {
    T v;
    take(&v, sizeof(v));
    return v;
  }

  void take(void* out, std::size_t n) {
    if (pos_ + n > end_) throw ModelTruncationError("model file truncated");
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }

  Linear<float> get_linear() {
    const auto rows = get<std::uint32_t>();
    const auto cols = get<std::uint32_t>();
    if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20))
      throw ModelIoError("model file: implausible layer dimensions");
    const std::size_t weight_bytes = std::size_t{rows} * cols * sizeof(float);
    if (pos_ + weight_bytes + rows * sizeof(float) > end_)
      throw ModelTruncationError("model file truncated inside a layer");
    Linear<float> l(static_cast<int>(rows), static_cast<int>(cols));
    take(l.weight.data.data(), weight_bytes);
    take(l.bias.data(), rows * sizeof(float));
    return l;
  }

  std::size_t pos() const { return pos_; }

 private:
  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = sizeof(kModelMagic);
};

}  // namespace

std::string serialize_model(const PolicyModel<float>& model, bool strip_value_head) {
  std::string out;
  put_bytes(out, kModelMagic, sizeof(kModelMagic));
  put<std::uint16_t>(out, kModelFormatVersion);
  put<std::uint16_t>(out, model.obs_layout_version);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(model.mode));
  const bool keep_value = model.has_value_head && !strip_value_head;
  put<std::uint8_t>(out, keep_value ? 1 : 0);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(model.action_dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.input_dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.trunk.size()));
  for (const auto& l : model.trunk) put_linear(out, l);
  put_linear(out, model.mu_head);
  if (keep_value) put_linear(out, model.value_head);
  put_bytes(out, model.log_sigma.data(), model.log_sigma.size() * sizeof(float));
  const auto& n = model.norm;
  for (double v : {n.bounds_min.x, n.bounds_min.y, n.bounds_min.z, n.bounds_max.x,
                   n.bounds_max.y, n.bounds_max.z})
    put<float>(out, static_cast<float>(v));
  put<std::uint32_t>(out, n.stack_size);
  put<std::uint32_t>(out, n.frame_size);

  const std::uint32_t crc =
      crc32c(out.data() + sizeof(kModelMagic), out.size() - sizeof(kModelMagic));
  put<std::uint32_t>(out, crc);
  return out;
}

PolicyModel<float> deserialize_model(const std::string& bytes) {
  if (bytes.size() < sizeof(kModelMagic) + sizeof(std::uint32_t))
    throw ModelTruncationError("model file too short");
  if (std::memcmp(bytes.data(), kModelMagic, sizeof(kModelMagic)) != 0)
    throw ModelIoError("model file: bad magic");

  const std::size_t body_end = bytes.size() - sizeof(std::uint32_t);
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + body_end, sizeof(stored_crc));
  const std::uint32_t actual_crc =
      crc32c(bytes.data() + sizeof(kModelMagic), body_end - sizeof(kModelMagic));
  if (stored_crc != actual_crc)
    throw ModelChecksumError("model file: checksum mismatch");

  Reader r(bytes, body_end);
  const auto format_version = r.get<std::uint16_t>();
  if (format_version != kModelFormatVersion)
    throw ModelVersionError("model file: unsupported format version " +
                            std::to_string(format_version));

  PolicyModel<float> m;
  m.obs_layout_version = r.get<std::uint16_t>();
  m.mode = static_cast<ControlMode>(r.get<std::uint8_t>());
  const bool has_value_head = r.get<std::uint8_t>() != 0;
  m.action_dim = r.get<std::uint16_t>();
  m.input_dim = static_cast<int>(r.get<std::uint32_t>());
  const auto trunk_layers = r.get<std::uint32_t>();
  if (trunk_layers > 64) throw ModelIoError("model file: implausible trunk depth");

  int expect_in = m.input_dim;
  for (std::uint32_t k = 0; k < trunk_layers; ++k) {
    Linear<float> l = r.get_linear();
    if (l.in_dim() != expect_in)
      throw ModelIoError("model file: trunk layer dimension chain mismatch");
    expect_in = l.out_dim();
    m.trunk.push_back(std::move(l));
  }
  m.mu_head = r.get_linear();
  if (m.mu_head.in_dim() != expect_in || m.mu_head.out_dim() != m.action_dim)
    throw ModelIoError("model file: policy head dimension mismatch");
  if (has_value_head) {
    m.value_head = r.get_linear();
    if (m.value_head.in_dim() != expect_in || m.value_head.out_dim() != 1)
      throw ModelIoError("model file: value head dimension mismatch");
  } else {
    m.value_head = Linear<float>(1, expect_in);
    m.has_value_head = false;
  }
  m.log_sigma.resize(static_cast<std::size_t>(m.action_dim));
  r.take(m.log_sigma.data(), m.log_sigma.size() * sizeof(float));
  float bounds[6];
  r.take(bounds, sizeof(bounds));
  m.norm.bounds_min = {bounds[0], bounds[1], bounds[2]};
  m.norm.bounds_max = {bounds[3], bounds[4], bounds[5]};
  m.norm.stack_size = r.get<std::uint32_t>();
  m.norm.frame_size = r.get<std::uint32_t>();
  if (r.pos() != body_end) throw ModelIoError("model file: trailing bytes");
  return m;
}

void save_checkpoint(const PolicyModel<float>& model, const std::string& path,
                     bool strip_value_head) {
  const std::string bytes = serialize_model(model, strip_value_head);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

PolicyModel<float> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace aprl
