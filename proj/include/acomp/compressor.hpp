#pragma once

#include <cstddef>
#include <vector>

#include "acomp/losses.hpp"
#include "acomp/model.hpp"
#include "acomp/partition.hpp"
#include "acomp/policy.hpp"
#include "acomp/quantization.hpp"
#include "acomp/transform.hpp"

namespace acomp {

enum class CompressMode {
  off,      // activation passes through
  dr_only,  // transform, zero the pruned group, invert
  soft,     // weighted sum of branches per group
  hard,     // argmax branch per group
};

/// Group-wise mixed precision plus dimension reduction on every compressed
/// activation: A' = U^T (A - mean), each quantized group goes through its MP
/// module, the pruned group is zeroed, and the result is mapped back.
class ActivationCompressor {
 public:
  ActivationCompressor(std::vector<ActivationDims> dims, std::size_t groups,
                       std::vector<int> init_bits, float calib_decay = 0.99f);

  // Single-branch modules and fixed ranges taken from a frozen policy.
  static ActivationCompressor from_policy(const CompressionPolicy& policy);

  void set_transforms(std::vector<TransformCache> transforms);
  void set_partition(GroupPartition partition);

  Tensor operator()(std::size_t layer, const Tensor& activation);
  ActivationHook hook();

  CompressMode mode = CompressMode::off;
  bool track_ranges = false;

  std::size_t layers() const { return dims_.size(); }
  std::size_t groups() const { return groups_; }
  // Quantized groups per layer = G - 1.
  std::size_t quantized_groups() const { return groups_ - 1; }
  MPModuleState& module(std::size_t layer, std::size_t group);
  const MPModuleState& module(std::size_t layer, std::size_t group) const;
  std::vector<Tensor> arch_params() const;

  const std::vector<TransformCache>& transforms() const { return transforms_; }
  const GroupPartition& partition() const { return partition_; }
  const std::vector<ActivationDims>& dims() const { return dims_; }
  Calibration range(std::size_t layer, std::size_t group) const;

  std::vector<GroupFootprint> footprints() const;
  std::size_t total_values() const;
  // sum pi*b*d*h*w / total values, the soft counterpart of average_bits.
  double expected_avg_bits() const;
  // Every module's largest mixing weight exceeds `threshold`.
  bool concentrated(double threshold) const;

  CompressionPolicy freeze(int b_min, std::uint64_t seed, std::uint64_t config_hash) const;

 private:
  std::vector<ActivationDims> dims_;
  std::size_t groups_;
  std::vector<TransformCache> transforms_;
  GroupPartition partition_;
  std::vector<MPModuleState> modules_;    // layer-major
  std::vector<RangeTracker> trackers_;    // parallel to modules_
};

// Zeroes the `pruned` least important transformed channels and maps back.
Tensor prune_trailing(const Tensor& activation, const TransformCache& cache, std::size_t pruned);

}  // namespace acomp
