#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace acomp {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every knob of a run. The text form is flat `key = value` lines; `#` starts
/// a comment. A config file must set every key exactly once.
struct RunConfig {
  std::uint64_t seed = 1;

  // data
  std::string train_data = "data/train";
  std::string eval_data = "data/eval";
  std::string data_format = "auto";
  int num_classes = 10;
  int eval_samples = 0;  // 0 = whole split

  // baseline
  int baseline_epochs = 15;
  double baseline_lr = 0.02;
  int weight_bits = 8;

  // co-design
  int groups = 3;                       // G, the last group is pruned
  int branches = 3;                     // N
  std::vector<int> init_bits{6, 7, 8};
  std::string thresholds = "auto";      // "auto" or G-1 ascending fractions
  double dr_budget = 1.0;               // accuracy points the pruning probe may lose
  int pca_samples = 256;
  int refit_every = 1;                  // epochs between PCA/partition refits
  double calib_decay = 0.99;

  // search
  int patience = 3;
  std::string patience_mode = "consecutive";
  int b_min = 2;

  // fine-tuning
  double p = 0.03;
  double lr = 0.01;
  double arch_lr = 1.0;
  double momentum = 0.9;
  int epochs = 10;
  int settle_epochs = 2;                // trailing epochs with the search switched off
  double settle_temperature = 0.01;     // softmax temperature reached at the end of the settle epochs
  int batch_size = 64;
  int finetune_samples = 5000;

  void validate() const;
  // G - 1 explicit thresholds, or empty for "auto".
  std::vector<double> explicit_thresholds() const;
};

RunConfig parse_config(const std::string& text);
std::string emit_config(const RunConfig& cfg);
RunConfig load_config(const std::string& path);

// Sets one field from its text form (used for CLI overrides).
void set_config_field(RunConfig& cfg, const std::string& key, const std::string& value);
std::vector<std::string> config_keys();

std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace acomp
