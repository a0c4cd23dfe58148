#include "acomp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "acomp/binary_io.hpp"

namespace acomp {

void DatasetSplit::validate() const {
  if (pixels.size() != count * image_size() || labels.size() != count) {
    throw std::runtime_error("dataset: pixel/label counts do not match header");
  }
  for (int l : labels) {
    if (l < 0 || l >= num_classes) {
      throw std::runtime_error("dataset: label " + std::to_string(l) + " out of range [0, " +
                               std::to_string(num_classes) + ")");
    }
  }
}

DatasetSplit DatasetSplit::subset(std::span<const std::size_t> indices) const {
  DatasetSplit s;
  s.count = indices.size();
  s.height = height;
  s.width = width;
  s.channels = channels;
  s.num_classes = num_classes;
  s.train = train;
  s.pixels.reserve(indices.size() * image_size());
  for (auto i : indices) {
    auto first = pixels.begin() + static_cast<std::ptrdiff_t>(i * image_size());
    s.pixels.insert(s.pixels.end(), first, first + static_cast<std::ptrdiff_t>(image_size()));
    s.labels.push_back(labels.at(i));
  }
  return s;
}

Normalization Normalization::from(const DatasetSplit& split) {
  Normalization n;
  n.mean.assign(split.channels, 0.0f);
  n.stddev.assign(split.channels, 1.0f);
  const std::size_t per = split.count * split.height * split.width;
  if (per == 0) return n;
  for (std::size_t c = 0; c < split.channels; ++c) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = c; i < split.pixels.size(); i += split.channels) {
      const double v = split.pixels[i] / 255.0;
      s += v;
      s2 += v * v;
    }
    const double m = s / static_cast<double>(per);
    const double var = std::max(1e-8, s2 / static_cast<double>(per) - m * m);
    n.mean[c] = static_cast<float>(m);
    n.stddev[c] = static_cast<float>(std::sqrt(var));
  }
  return n;
}

Tensor make_batch(const DatasetSplit& split, std::span<const std::size_t> indices,
                  const Normalization& norm) {
  const std::size_t n = indices.size(), c = split.channels, h = split.height, w = split.width;
  std::vector<float> out(n * c * h * w);
  for (std::size_t b = 0; b < n; ++b) {
    const std::uint8_t* img = split.pixels.data() + indices[b] * split.image_size();
    for (std::size_t ch = 0; ch < c; ++ch) {
      const float m = norm.mean[ch], inv = 1.0f / norm.stddev[ch];
      float* dst = out.data() + (b * c + ch) * h * w;
      for (std::size_t p = 0; p < h * w; ++p) dst[p] = (img[p * c + ch] / 255.0f - m) * inv;
    }
  }
  return Tensor(Shape{n, c, h, w}, std::move(out));
}

std::vector<int> batch_labels(const DatasetSplit& split, std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(split.labels.at(i));
  return out;
}

DatasetFormat parse_dataset_format(const std::string& s) {
  if (s == "auto") return DatasetFormat::automatic;
  if (s == "idx") return DatasetFormat::idx;
  if (s == "raw") return DatasetFormat::raw;
  throw std::invalid_argument("unknown dataset format '" + s + "' (expected auto, idx or raw)");
}

namespace {

namespace fs = std::filesystem;

constexpr std::uint32_t kIdxLabels = 0x00000801;
constexpr std::uint32_t kIdxImages3 = 0x00000803;
constexpr std::uint32_t kIdxImages4 = 0x00000804;

std::string read_or_empty(const fs::path& p) {
  if (!fs::exists(p)) throw std::runtime_error("dataset: no such file " + p.string());
  return read_file(p);
}

void check_label_range(const DatasetSplit& s) {
  for (int l : s.labels) {
    if (l >= s.num_classes) {
      throw std::runtime_error("dataset: label " + std::to_string(l) + " out of range for " +
                               std::to_string(s.num_classes) + " classes");
    }
  }
}

DatasetSplit load_raw(const fs::path& path, int num_classes) {
  ByteReader r(read_or_empty(path), "dataset " + path.string());
  if (r.size() < 4 || r.bytes(4) != "ACDS") throw std::runtime_error("dataset: bad magic in " + path.string());
  DatasetSplit s;
  s.num_classes = num_classes;
  s.count = r.u32();
  s.height = r.u32();
  s.width = r.u32();
  s.channels = r.u32();
  if (r.remaining() < s.count * (1 + s.image_size())) {
    throw std::runtime_error("dataset: truncated file " + path.string());
  }
  s.pixels.reserve(s.count * s.image_size());
  for (std::size_t i = 0; i < s.count; ++i) {
    s.labels.push_back(r.u8());
    const std::string px = r.bytes(s.image_size());
    s.pixels.insert(s.pixels.end(), px.begin(), px.end());
  }
  check_label_range(s);
  return s;
}

std::pair<fs::path, fs::path> idx_paths(const fs::path& path) {
  const std::string p = path.string();
  const std::string tag = "-images.idx";
  if (p.size() > tag.size() && p.compare(p.size() - tag.size(), tag.size(), tag) == 0) {
    return {path, p.substr(0, p.size() - tag.size()) + "-labels.idx"};
  }
  return {p + "-images.idx", p + "-labels.idx"};
}

DatasetSplit load_idx(const fs::path& path, int num_classes) {
  const auto [images_path, labels_path] = idx_paths(path);
  ByteReader img(read_or_empty(images_path), "dataset " + images_path.string());
  if (img.size() < 4) throw std::runtime_error("dataset: bad magic in " + images_path.string());
  const std::uint32_t magic = img.u32_be();
  if (magic != kIdxImages3 && magic != kIdxImages4) {
    throw std::runtime_error("dataset: bad magic in " + images_path.string());
  }
  DatasetSplit s;
  s.num_classes = num_classes;
  s.count = img.u32_be();
  s.height = img.u32_be();
  s.width = img.u32_be();
  s.channels = magic == kIdxImages4 ? img.u32_be() : 1;
  if (img.remaining() < s.count * s.image_size()) {
    throw std::runtime_error("dataset: truncated file " + images_path.string());
  }
  const std::string px = img.bytes(s.count * s.image_size());
  s.pixels.assign(px.begin(), px.end());

  ByteReader lab(read_or_empty(labels_path), "dataset " + labels_path.string());
  if (lab.size() < 4 || lab.u32_be() != kIdxLabels) {
    throw std::runtime_error("dataset: bad magic in " + labels_path.string());
  }
  const std::uint32_t n = lab.u32_be();
  if (n != s.count) throw std::runtime_error("dataset: label count does not match image count");
  if (lab.remaining() < n) throw std::runtime_error("dataset: truncated file " + labels_path.string());
  for (std::uint32_t i = 0; i < n; ++i) s.labels.push_back(lab.u8());
  check_label_range(s);
  return s;
}

void put_be(ByteWriter& w, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) w.u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

DatasetSplit load_dataset(const fs::path& path, DatasetFormat format, int num_classes) {
  if (format == DatasetFormat::automatic) {
    // A plain file is raw unless it is the images half of an idx pair.
    const bool idx_images = fs::is_regular_file(path) && idx_paths(path).first == path;
    format = fs::is_regular_file(path) && !idx_images ? DatasetFormat::raw : DatasetFormat::idx;
  }
  return format == DatasetFormat::raw ? load_raw(path, num_classes) : load_idx(path, num_classes);
}

void save_idx(const DatasetSplit& split, const fs::path& prefix) {
  split.validate();
  const auto [images_path, labels_path] = idx_paths(prefix);
  ByteWriter img;
  put_be(img, kIdxImages4);
  put_be(img, static_cast<std::uint32_t>(split.count));
  put_be(img, static_cast<std::uint32_t>(split.height));
  put_be(img, static_cast<std::uint32_t>(split.width));
  put_be(img, static_cast<std::uint32_t>(split.channels));
  img.bytes(std::string_view(reinterpret_cast<const char*>(split.pixels.data()), split.pixels.size()));
  write_file_atomic(images_path, img.buffer());

  ByteWriter lab;
  put_be(lab, kIdxLabels);
  put_be(lab, static_cast<std::uint32_t>(split.count));
  for (int l : split.labels) lab.u8(static_cast<std::uint8_t>(l));
  write_file_atomic(labels_path, lab.buffer());
}

void save_raw(const DatasetSplit& split, const fs::path& path) {
  split.validate();
  ByteWriter w;
  w.bytes("ACDS");
  w.u32(static_cast<std::uint32_t>(split.count));
  w.u32(static_cast<std::uint32_t>(split.height));
  w.u32(static_cast<std::uint32_t>(split.width));
  w.u32(static_cast<std::uint32_t>(split.channels));
  for (std::size_t i = 0; i < split.count; ++i) {
    w.u8(static_cast<std::uint8_t>(split.labels[i]));
    w.bytes(std::string_view(reinterpret_cast<const char*>(split.pixels.data() + i * split.image_size()),
                             split.image_size()));
  }
  write_file_atomic(path, w.buffer());
}

namespace {

bool inside_shape(int label, float dx, float dy, float s) {
  const float ax = std::fabs(dx), ay = std::fabs(dy);
  const float r = std::sqrt(dx * dx + dy * dy);
  const bool in_box = ax < s && ay < s;
  auto band = [](float v, float width) { return static_cast<int>(std::floor(v / width)) % 2 == 0; };
  switch (label) {
    case 0: return r < s;
    case 1: return in_box;
    case 2: return dy > -s && dy < s && ax < 0.5f * (dy + s);
    case 3: return (ax < s / 3 && ay < s) || (ay < s / 3 && ax < s);
    case 4: return r < s && r > 0.55f * s;
    case 5: return in_box && band(dy + s, 3.0f);
    case 6: return in_box && band(dx + s, 3.0f);
    case 7: return in_box && band(dx + dy + 2 * s, 3.0f);
    case 8: return in_box && ((static_cast<int>((dx + s) / 3) + static_cast<int>((dy + s) / 3)) % 2 == 0);
    default: return std::fabs(ax - ay) < s / 3 && ax < s && ay < s;
  }
}

}  // namespace

DatasetSplit make_synthetic_dataset(std::size_t count, std::uint64_t seed, bool train) {
  constexpr std::size_t kSide = 32, kChannels = 3;
  constexpr int kClasses = 10;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::normal_distribution<float> noise(0.0f, 1.0f);

  DatasetSplit s;
  s.count = count;
  s.height = kSide;
  s.width = kSide;
  s.channels = kChannels;
  s.num_classes = kClasses;
  s.train = train;
  s.pixels.resize(count * s.image_size());
  s.labels.resize(count);

  std::vector<float> img(s.image_size());
  for (std::size_t n = 0; n < count; ++n) {
    const int label = static_cast<int>(rng() % kClasses);
    s.labels[n] = label;
    float fg[3], bg[3], grad[3];
    for (int c = 0; c < 3; ++c) {
      fg[c] = unit(rng);
      const float gap = 0.35f + 0.3f * unit(rng);
      bg[c] = std::clamp(fg[c] > 0.5f ? fg[c] - gap : fg[c] + gap, 0.0f, 1.0f);
      grad[c] = 0.5f * (unit(rng) - 0.5f);
    }
    const float angle = 6.2831853f * unit(rng);
    const float gx = std::cos(angle), gy = std::sin(angle);
    const float size = 5.0f + 6.0f * unit(rng);
    const float cx = 10.0f + 12.0f * unit(rng), cy = 10.0f + 12.0f * unit(rng);
    const float noise_level = 0.1f + 0.15f * unit(rng);

    for (std::size_t y = 0; y < kSide; ++y)
      for (std::size_t x = 0; x < kSide; ++x) {
        const float t = ((static_cast<float>(x) - 16.0f) * gx + (static_cast<float>(y) - 16.0f) * gy) / 16.0f;
        const bool in = inside_shape(label, static_cast<float>(x) - cx, static_cast<float>(y) - cy, size);
        for (std::size_t c = 0; c < kChannels; ++c) {
          const float base = in ? fg[c] : bg[c] + grad[c] * t;
          img[(y * kSide + x) * kChannels + c] = base;
        }
      }
    // Distractor blobs.
    const int blobs = static_cast<int>(rng() % 4);
    for (int b = 0; b < blobs; ++b) {
      const auto bx = static_cast<std::size_t>(rng() % 29), by = static_cast<std::size_t>(rng() % 29);
      const std::size_t bs = 2 + rng() % 3;
      float col[3] = {unit(rng), unit(rng), unit(rng)};
      for (std::size_t y = by; y < std::min(kSide, by + bs); ++y)
        for (std::size_t x = bx; x < std::min(kSide, bx + bs); ++x)
          for (std::size_t c = 0; c < kChannels; ++c) img[(y * kSide + x) * kChannels + c] = col[c];
    }
    std::uint8_t* dst = s.pixels.data() + n * s.image_size();
    for (std::size_t i = 0; i < img.size(); ++i) {
      const float v = img[i] + noise_level * noise(rng);
      dst[i] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
    }
  }
  return s;
}

}  // namespace acomp
