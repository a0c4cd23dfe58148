#include "acomp/checkpoint.hpp"

#include "acomp/binary_io.hpp"

namespace acomp {

std::string encode_checkpoint(const NamedTensors& tensors) {
  ByteWriter w;
  w.bytes("ACPT");
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (auto e : t.shape()) w.u64(e);
    for (float v : t.data()) w.f32(v);
  }
  return w.buffer();
}

NamedTensors decode_checkpoint(std::string bytes) {
  ByteReader r(std::move(bytes), "checkpoint");
  if (r.size() < 4 || r.bytes(4) != "ACPT") throw std::runtime_error("checkpoint: bad magic");
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto count = r.u32();
  NamedTensors out;
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name = r.str();
    const auto rank = r.u32();
    Shape shape(rank);
    for (auto& e : shape) e = r.u64();
    const std::size_t n = shape_numel(shape);
    if (n * 4 > r.remaining()) throw std::runtime_error("checkpoint: truncated payload for " + name);
    std::vector<float> values(n);
    for (auto& v : values) v = r.f32();
    out.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const NamedTensors& tensors) {
  write_file_atomic(path, encode_checkpoint(tensors));
}

NamedTensors load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace acomp
