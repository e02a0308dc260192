#pragma once

#include <cstdint>
#include <string>

#include "aprl/nn.hpp"

namespace aprl {

// "APML" flat binary model format, used both for training checkpoints and
// for deployment exports. Little-endian throughout. Layout:
//
//   magic            "APML" (4 bytes)
//   format_version   u16  (currently 1)
//   obs_layout       u16
//   mode             u8   (0 = helicopter, 1 = zero-g)
//   has_value_head   u8
//   action_dim       u16
//   input_dim        u32
//   trunk_layers     u32
//   per linear layer (trunk..., mu head, value head if present):
//     rows u32, cols u32, weights f32[rows*cols] row-major, bias f32[rows]
//   log_sigma        f32[action_dim]
//   normalization    f32 bounds_min[3], f32 bounds_max[3],
//                    u32 stack_size, u32 frame_size
//   crc32c           u32 over every byte after the magic
inline constexpr std::uint16_t kModelFormatVersion = 1;
inline constexpr char kModelMagic[4] = {'A', 'P', 'M', 'L'};

// Thrown with distinct subtypes so callers can tell version trouble from
// corruption from truncation.
class ModelIoError : public IoError {
 public:
  using IoError::IoError;
};
class ModelVersionError : public ModelIoError {
 public:
  using ModelIoError::ModelIoError;
};
class ModelChecksumError : public ModelIoError {
 public:
  using ModelIoError::ModelIoError;
};
class ModelTruncationError : public ModelIoError {
 public:
  using ModelIoError::ModelIoError;
};

// Serializes to an in-memory buffer / file. strip_value_head drops the value
// head (deployment only needs the policy).
std::string serialize_model(const PolicyModel<float>& model, bool strip_value_head = false);
PolicyModel<float> deserialize_model(const std::string& bytes);

void save_checkpoint(const PolicyModel<float>& model, const std::string& path,
                     bool strip_value_head = false);
PolicyModel<float> load_checkpoint(const std::string& path);

}  // namespace aprl
