#include "acomp/policy.hpp"

#include <cmath>
#include <stdexcept>

#include "acomp/binary_io.hpp"
#include "json.hpp"

namespace acomp {

double average_bits(const std::vector<PolicyLayer>& layers) {
  double stored = 0.0, total = 0.0;
  for (const auto& l : layers) {
    total += static_cast<double>(l.dims.values());
    for (std::size_t g = 0; g + 1 < l.groups.groups(); ++g) {
      stored += static_cast<double>(l.bits.at(g)) * static_cast<double>(l.groups.group_size(g)) *
                static_cast<double>(l.dims.plane());
    }
  }
  return total > 0.0 ? stored / total : 0.0;
}

double CompressionPolicy::recompute_avg_bits() const { return average_bits(layers); }

void CompressionPolicy::validate() const {
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const auto& l = layers[li];
    const std::string where = "policy layer " + std::to_string(li);
    const std::size_t d = l.dims.channels;
    if (l.transform.dim != d || l.transform.basis.size() != d * d ||
        l.transform.eigenvalues.size() != d || l.transform.channel_mean.size() != d) {
      throw std::runtime_error(where + ": transform does not match " + std::to_string(d) + " channels");
    }
    if (l.groups.channels != d || l.groups.bounds.size() < 3 || l.groups.bounds.front() != 0 ||
        l.groups.bounds.back() != d) {
      throw std::runtime_error(where + ": group bounds do not cover the channels");
    }
    for (std::size_t g = 1; g < l.groups.bounds.size(); ++g) {
      if (l.groups.bounds[g] < l.groups.bounds[g - 1]) throw std::runtime_error(where + ": bounds not sorted");
    }
    const std::size_t quantized = l.groups.groups() - 1;
    if (l.bits.size() != quantized || l.ranges.size() != quantized) {
      throw std::runtime_error(where + ": expected " + std::to_string(quantized) + " quantized groups");
    }
    for (std::size_t g = 0; g < quantized; ++g) {
      if (l.bits[g] < b_min || l.bits[g] > 8) {
        throw std::runtime_error(where + ": bit width " + std::to_string(l.bits[g]) + " outside [" +
                                 std::to_string(b_min) + ", 8]");
      }
      if (!(l.ranges[g].lo < l.ranges[g].hi)) throw std::runtime_error(where + ": empty calibration range");
    }
  }
  if (std::fabs(recompute_avg_bits() - avg_bits) > 1e-6) {
    throw std::runtime_error("policy: stored average bits disagree with the layout");
  }
}

std::string encode_policy(const CompressionPolicy& policy) {
  ByteWriter w;
  w.bytes("ACPL");
  w.u32(kPolicyVersion);
  w.u64(policy.seed);
  w.u64(policy.config_hash);
  w.u32(static_cast<std::uint32_t>(policy.b_min));
  w.f64(policy.avg_bits);
  w.u32(static_cast<std::uint32_t>(policy.layers.size()));
  for (const auto& l : policy.layers) {
    const std::size_t d = l.dims.channels;
    w.u32(static_cast<std::uint32_t>(d));
    w.u32(static_cast<std::uint32_t>(l.dims.height));
    w.u32(static_cast<std::uint32_t>(l.dims.width));
    for (float v : l.transform.basis) w.f32(v);
    for (float v : l.transform.eigenvalues) w.f32(v);
    for (float v : l.transform.channel_mean) w.f32(v);
    w.u64(l.transform.sample_count);
    // Transformed channels are already in importance order.
    for (std::size_t c = 0; c < d; ++c) w.u32(static_cast<std::uint32_t>(c));
    w.u32(static_cast<std::uint32_t>(l.groups.groups()));
    for (auto b : l.groups.bounds) w.u32(static_cast<std::uint32_t>(b));
    for (std::size_t g = 0; g < l.bits.size(); ++g) {
      w.u32(static_cast<std::uint32_t>(l.bits[g]));
      w.f32(l.ranges[g].lo);
      w.f32(l.ranges[g].hi);
    }
  }
  return w.buffer();
}

CompressionPolicy decode_policy(std::string bytes) {
  ByteReader r(std::move(bytes), "policy");
  if (r.size() < 4 || r.bytes(4) != "ACPL") throw std::runtime_error("policy: bad magic");
  const auto version = r.u32();
  if (version != kPolicyVersion) throw std::runtime_error("policy: unsupported version " + std::to_string(version));
  CompressionPolicy p;
  p.seed = r.u64();
  p.config_hash = r.u64();
  p.b_min = static_cast<int>(r.u32());
  p.avg_bits = r.f64();
  const auto layers = r.u32();
  for (std::uint32_t li = 0; li < layers; ++li) {
    PolicyLayer l;
    l.dims.channels = r.u32();
    l.dims.height = r.u32();
    l.dims.width = r.u32();
    const std::size_t d = l.dims.channels;
    if (d * d * 4 > r.remaining()) throw std::runtime_error("policy: truncated transform");
    l.transform.layer_id = li;
    l.transform.dim = d;
    l.transform.basis.resize(d * d);
    for (auto& v : l.transform.basis) v = r.f32();
    l.transform.eigenvalues.resize(d);
    for (auto& v : l.transform.eigenvalues) v = r.f32();
    l.transform.channel_mean.resize(d);
    for (auto& v : l.transform.channel_mean) v = r.f32();
    l.transform.sample_count = r.u64();
    for (std::size_t c = 0; c < d; ++c) {
      if (r.u32() != c) throw std::runtime_error("policy: unsupported channel permutation");
    }
    const auto groups = r.u32();
    if (groups < 2 || groups > 1024) throw std::runtime_error("policy: bad group count");
    l.groups.channels = d;
    l.groups.bounds.resize(groups + 1);
    for (auto& b : l.groups.bounds) b = r.u32();
    for (std::uint32_t g = 0; g + 1 < groups; ++g) {
      l.bits.push_back(static_cast<int>(r.u32()));
      Calibration c;
      c.lo = r.f32();
      c.hi = r.f32();
      l.ranges.push_back(c);
    }
    p.layers.push_back(std::move(l));
  }
  if (r.remaining() != 0) throw std::runtime_error("policy: trailing bytes");
  p.validate();
  return p;
}

void save_policy(const std::filesystem::path& path, const CompressionPolicy& policy) {
  write_file_atomic(path, encode_policy(policy));
}

CompressionPolicy load_policy(const std::filesystem::path& path) { return decode_policy(read_file(path)); }

std::string policy_json(const CompressionPolicy& policy) {
  nlohmann::ordered_json j;
  j["avg_bits"] = policy.avg_bits;
  j["seed"] = policy.seed;
  j["config_hash"] = policy.config_hash;
  j["b_min"] = policy.b_min;
  j["layers"] = nlohmann::ordered_json::array();
  for (std::size_t li = 0; li < policy.layers.size(); ++li) {
    const auto& l = policy.layers[li];
    nlohmann::ordered_json layer;
    layer["layer"] = li;
    layer["channels"] = l.dims.channels;
    layer["height"] = l.dims.height;
    layer["width"] = l.dims.width;
    layer["pruned"] = l.groups.pruned();
    layer["groups"] = nlohmann::ordered_json::array();
    for (std::size_t g = 0; g < l.groups.groups(); ++g) {
      nlohmann::ordered_json grp;
      grp["group"] = g + 1;
      grp["channels"] = l.groups.group_size(g);
      const bool pruned = g + 1 == l.groups.groups();
      grp["bits"] = pruned ? 0 : l.bits[g];
      grp["pruned"] = pruned;
      layer["groups"].push_back(grp);
    }
    j["layers"].push_back(layer);
  }
  return j.dump(2);
}

}  // namespace acomp
