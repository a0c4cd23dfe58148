#include "acomp/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "acomp/binary_io.hpp"

namespace acomp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config: bad value '" + v + "' for " + key);
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

struct Field {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define ACOMP_INT_FIELD(member)                                                                \
  Field {                                                                                      \
    #member, [](RunConfig& c, const std::string& v) { c.member = parse_number<int>(#member, v); }, \
        [](const RunConfig& c) { return std::to_string(c.member); }                            \
  }
#define ACOMP_DOUBLE_FIELD(member)                                                                  \
  Field {                                                                                           \
    #member, [](RunConfig& c, const std::string& v) { c.member = parse_number<double>(#member, v); }, \
        [](const RunConfig& c) { return fmt_double(c.member); }                                     \
  }
#define ACOMP_STRING_FIELD(member)                                          \
  Field {                                                                   \
    #member, [](RunConfig& c, const std::string& v) { c.member = v; },      \
        [](const RunConfig& c) { return c.member; }                         \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
      ACOMP_STRING_FIELD(train_data),
      ACOMP_STRING_FIELD(eval_data),
      ACOMP_STRING_FIELD(data_format),
      ACOMP_INT_FIELD(num_classes),
      ACOMP_INT_FIELD(eval_samples),
      ACOMP_INT_FIELD(baseline_epochs),
      ACOMP_DOUBLE_FIELD(baseline_lr),
      ACOMP_INT_FIELD(weight_bits),
      ACOMP_INT_FIELD(groups),
      ACOMP_INT_FIELD(branches),
      Field{"init_bits",
            [](RunConfig& c, const std::string& v) {
              c.init_bits.clear();
              for (const auto& s : split_list(v)) c.init_bits.push_back(parse_number<int>("init_bits", s));
            },
            [](const RunConfig& c) {
              std::string s;
              for (std::size_t i = 0; i < c.init_bits.size(); ++i) s += (i ? "," : "") + std::to_string(c.init_bits[i]);
              return s;
            }},
      ACOMP_STRING_FIELD(thresholds),
      ACOMP_DOUBLE_FIELD(dr_budget),
      ACOMP_INT_FIELD(pca_samples),
      ACOMP_INT_FIELD(refit_every),
      ACOMP_DOUBLE_FIELD(calib_decay),
      ACOMP_INT_FIELD(patience),
      ACOMP_STRING_FIELD(patience_mode),
      ACOMP_INT_FIELD(b_min),
      ACOMP_DOUBLE_FIELD(p),
      ACOMP_DOUBLE_FIELD(lr),
      ACOMP_DOUBLE_FIELD(arch_lr),
      ACOMP_DOUBLE_FIELD(momentum),
      ACOMP_INT_FIELD(epochs),
      ACOMP_INT_FIELD(settle_epochs),
      ACOMP_DOUBLE_FIELD(settle_temperature),
      ACOMP_INT_FIELD(batch_size),
      ACOMP_INT_FIELD(finetune_samples),
  };
  return table;
}

#undef ACOMP_INT_FIELD
#undef ACOMP_DOUBLE_FIELD
#undef ACOMP_STRING_FIELD

const Field& find_field(const std::string& key) {
  for (const auto& f : fields())
    if (key == f.name) return f;
  throw ConfigError("config: unknown key '" + key + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config: " + what);
}

}  // namespace

std::vector<double> RunConfig::explicit_thresholds() const {
  if (thresholds == "auto") return {};
  std::vector<double> out;
  for (const auto& s : split_list(thresholds)) out.push_back(parse_number<double>("thresholds", s));
  return out;
}

void RunConfig::validate() const {
  require(num_classes >= 2, "num_classes must be >= 2");
  require(eval_samples >= 0, "eval_samples must be >= 0");
  require(baseline_epochs >= 0, "baseline_epochs must be >= 0");
  require(baseline_lr > 0, "baseline_lr must be positive");
  require(weight_bits >= 2 && weight_bits <= 16, "weight_bits must be in [2, 16]");
  require(groups >= 2, "groups must be >= 2 (the last group is pruned)");
  require(branches >= 1, "branches must be >= 1");
  require(init_bits.size() == static_cast<std::size_t>(branches), "init_bits needs one entry per branch");
  for (std::size_t i = 0; i < init_bits.size(); ++i) {
    require(init_bits[i] >= 1 && init_bits[i] <= 8, "init_bits entries must be in [1, 8]");
    require(i == 0 || init_bits[i] > init_bits[i - 1], "init_bits must be strictly ascending");
  }
  if (thresholds != "auto") {
    const auto t = explicit_thresholds();
    require(t.size() == static_cast<std::size_t>(groups - 1), "thresholds needs groups-1 entries");
    for (std::size_t i = 0; i < t.size(); ++i) {
      require(t[i] >= 0.0 && t[i] <= 1.0, "thresholds must lie in [0, 1]");
      require(i == 0 || t[i] > t[i - 1], "thresholds must ascend");
    }
  }
  require(dr_budget >= 0, "dr_budget must be >= 0");
  require(pca_samples >= 1, "pca_samples must be >= 1");
  require(refit_every >= 1, "refit_every must be >= 1");
  require(calib_decay >= 0 && calib_decay < 1, "calib_decay must be in [0, 1)");
  require(patience >= 1, "patience must be >= 1");
  require(patience_mode == "consecutive" || patience_mode == "cumulative",
          "patience_mode must be consecutive or cumulative");
  require(b_min >= 1 && b_min <= init_bits.front(), "b_min must be in [1, init_bits[0]]");
  require(p > 0, "p must be positive");
  require(lr >= 0 && arch_lr >= 0, "learning rates must be >= 0");
  require(momentum >= 0 && momentum < 1, "momentum must be in [0, 1)");
  require(epochs >= 1, "epochs must be >= 1");
  require(settle_epochs >= 0 && settle_epochs < epochs, "settle_epochs must be in [0, epochs)");
  require(settle_temperature > 0 && settle_temperature <= 1, "settle_temperature must be in (0, 1]");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(finetune_samples >= 1, "finetune_samples must be >= 1");
  require(data_format == "auto" || data_format == "idx" || data_format == "raw",
          "data_format must be auto, idx or raw");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config: line " + std::to_string(lineno) + " is not key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field& f = find_field(key);
    if (!seen.insert(key).second) throw ConfigError("config: duplicate key '" + key + "'");
    f.set(cfg, value);
  }
  for (const auto& f : fields()) {
    if (!seen.count(f.name)) throw ConfigError(std::string("config: missing field '") + f.name + "'");
  }
  cfg.validate();
  return cfg;
}

std::string emit_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.name) + " = " + f.get(cfg) + "\n";
  return out;
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

void set_config_field(RunConfig& cfg, const std::string& key, const std::string& value) {
  find_field(key).set(cfg, value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.name);
  return keys;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(emit_config(cfg)); }

}  // namespace acomp
