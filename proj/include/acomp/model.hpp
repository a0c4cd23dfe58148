#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "acomp/checkpoint.hpp"
#include "acomp/dataset.hpp"
#include "acomp/ops.hpp"
#include "acomp/tensor.hpp"

namespace acomp {

// Shape of one compressed activation (per image).
struct ActivationDims {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t plane() const { return height * width; }
  std::size_t values() const { return channels * height * width; }
};

// Called on each conv block's batch-normalized output before the ReLU; the
// returned tensor replaces the activation.
using ActivationHook = std::function<Tensor(std::size_t layer, const Tensor& activation)>;

struct ForwardOptions {
  bool train_bn = false;
  int weight_bits = 0;  // 0 = float weights, otherwise fake-quantized with STE
  const ActivationHook* hook = nullptr;
};

/// Four conv blocks (16/32/32/64 channels, 3x3, conv-BN-ReLU with 2x2 max
/// pooling after blocks 1, 2 and 4) followed by two linear layers.
class DeskCnn {
 public:
  static constexpr std::size_t kConvLayers = 4;

  DeskCnn(std::uint64_t seed, int num_classes = 10, std::size_t in_channels = 3,
          std::size_t image_side = 32);

  Tensor forward(const Tensor& x, const ForwardOptions& options) const;

  std::vector<Tensor> parameters() const;
  NamedTensors state() const;
  void load(const NamedTensors& named);
  DeskCnn clone() const;

  // Snaps every conv/linear weight onto its symmetric per-tensor grid.
  void quantize_weights(int bits);

  const std::vector<ActivationDims>& activation_dims() const { return dims_; }
  std::size_t activation_values() const;

  Normalization normalization;
  int num_classes() const { return num_classes_; }

 private:
  struct ConvBlock {
    Tensor weight;
    Tensor gamma;
    Tensor beta;
    mutable BatchNormStats stats;
    bool pool = false;
  };

  int num_classes_;
  std::vector<ConvBlock> blocks_;
  Tensor fc1_w, fc1_b, fc2_w, fc2_b;
  std::vector<ActivationDims> dims_;
};

// Top-1 predictions over `indices` in mini-batches (no graph recorded).
std::vector<int> predict(const DeskCnn& model, const DatasetSplit& data,
                         std::span<const std::size_t> indices, const ForwardOptions& options,
                         std::size_t batch_size = 128);
std::vector<float> logits_of(const DeskCnn& model, const DatasetSplit& data,
                             std::span<const std::size_t> indices, const ForwardOptions& options,
                             std::size_t batch_size = 128);

// Percentage of predictions equal to `reference`.
double agreement(std::span<const int> predictions, std::span<const int> reference);

}  // namespace acomp
