#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "explorium/tensor.hpp"

namespace explorium {

/// Binary parameter archive:
///   "QENS" 0x01, then records of
///   u16 LE name length | UTF-8 name | u8 rank | u32 LE dims... | f32 LE values...
/// until end of stream.
inline constexpr char kCheckpointMagic[4] = {'Q', 'E', 'N', 'S'};
inline constexpr std::uint8_t kCheckpointVersion = 0x01;

struct NamedTensor {
  std::string name;
  Tensor<float> tensor;
  bool operator==(const NamedTensor&) const = default;
};

std::vector<std::uint8_t> encode_checkpoint(const std::vector<NamedTensor>& records);

/// Throws FormatError("bad magic" / "unsupported version" / "truncated record ...").
std::vector<NamedTensor> decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& records);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

}  // namespace explorium
