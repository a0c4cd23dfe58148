#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "acomp/tensor.hpp"

namespace acomp {

/// A labelled image split, pixels stored as u8 NHWC.
struct DatasetSplit {
  std::size_t count = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  int num_classes = 10;
  std::vector<std::uint8_t> pixels;
  std::vector<int> labels;
  bool train = true;

  std::size_t image_size() const { return height * width * channels; }
  void validate() const;
  DatasetSplit subset(std::span<const std::size_t> indices) const;
};

struct Normalization {
  std::vector<float> mean;  // per channel, in [0, 1] pixel units
  std::vector<float> stddev;

  static Normalization from(const DatasetSplit& split);
};

// NCHW float batch of the given images, normalized per channel.
Tensor make_batch(const DatasetSplit& split, std::span<const std::size_t> indices,
                  const Normalization& norm);
std::vector<int> batch_labels(const DatasetSplit& split, std::span<const std::size_t> indices);

enum class DatasetFormat { automatic, idx, raw };

DatasetFormat parse_dataset_format(const std::string& s);

// idx: `<prefix>-images.idx` (magic 0x0803 n,h,w or 0x0804 n,h,w,c; big-endian
// dims) plus `<prefix>-labels.idx` (magic 0x0801). `path` may be the prefix or
// the images file itself.
// raw: "ACDS" | count u32 | h u32 | w u32 | c u32 (little-endian), then per
// image one label byte followed by h*w*c pixel bytes.
DatasetSplit load_dataset(const std::filesystem::path& path, DatasetFormat format, int num_classes);

void save_idx(const DatasetSplit& split, const std::filesystem::path& prefix);
void save_raw(const DatasetSplit& split, const std::filesystem::path& path);

// Procedural 10-class 32x32 RGB shapes (disc, square, triangle, plus, ring,
// horizontal bars, vertical bars, diagonal stripes, checker, cross) over noisy
// gradient backgrounds with distractor blobs.
DatasetSplit make_synthetic_dataset(std::size_t count, std::uint64_t seed, bool train);

}  // namespace acomp
