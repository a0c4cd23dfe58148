#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "acomp/tensor.hpp"

namespace acomp {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// Checkpoint layout (little-endian):
//   "ACPT" | version u32 | record count u32
//   per record: name length u32 | UTF-8 name | rank u32 | extents u64[rank] | f32 payload
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const NamedTensors& tensors);
NamedTensors decode_checkpoint(std::string bytes);

void save_checkpoint(const std::filesystem::path& path, const NamedTensors& tensors);
NamedTensors load_checkpoint(const std::filesystem::path& path);

}  // namespace acomp
