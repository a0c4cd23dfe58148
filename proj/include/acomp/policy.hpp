#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "acomp/model.hpp"
#include "acomp/partition.hpp"
#include "acomp/quantization.hpp"
#include "acomp/transform.hpp"

namespace acomp {

struct PolicyLayer {
  ActivationDims dims;
  TransformCache transform;
  LayerGroups groups;
  std::vector<int> bits;                // one per quantized group (G - 1)
  std::vector<Calibration> ranges;      // one per quantized group
};

/// Frozen inference configuration: per layer the PCA basis, the group layout
/// and one bit-width per quantized group. The last group of every layer is
/// pruned and costs no storage.
struct CompressionPolicy {
  std::vector<PolicyLayer> layers;
  int b_min = 2;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  double avg_bits = 0.0;

  double recompute_avg_bits() const;
  void validate() const;
};

// Stored activation bits over total activation values, pruned channels at 0.
double average_bits(const std::vector<PolicyLayer>& layers);

// Policy file (little-endian):
//   "ACPL" | version u32 | seed u64 | config hash u64 | b_min u32 | avg bits f64 | layers u32
//   per layer: d u32 | h u32 | w u32 | U f32[d*d] row-major | eigenvalues f32[d] | mean f32[d]
//              | sample count u64 | channel permutation u32[d] | G u32 | bounds u32[G+1]
//              | per quantized group: bits u32 | lo f32 | hi f32
inline constexpr std::uint32_t kPolicyVersion = 1;

std::string encode_policy(const CompressionPolicy& policy);
CompressionPolicy decode_policy(std::string bytes);
void save_policy(const std::filesystem::path& path, const CompressionPolicy& policy);
CompressionPolicy load_policy(const std::filesystem::path& path);

// Human-readable summary: per layer and group the bit-width and channel counts.
std::string policy_json(const CompressionPolicy& policy);

}  // namespace acomp
