#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "acomp/compressor.hpp"
#include "acomp/config.hpp"
#include "acomp/dataset.hpp"
#include "acomp/model.hpp"
#include "acomp/policy.hpp"
#include "acomp/search.hpp"

namespace acomp {

struct BaselineEpoch {
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
  double train_accuracy = 0.0;
};

struct BaselineResult {
  DeskCnn model{0};
  double float_accuracy = 0.0;
  double accuracy = 0.0;  // A0: after snapping the weights to weight_bits
  std::vector<BaselineEpoch> epochs;
};

// Cross-entropy training with SGD + momentum and a cosine schedule, then
// post-training weight quantization. Throws if the loss stops being finite.
BaselineResult train_baseline(const RunConfig& cfg, const DatasetSplit& train,
                              const DatasetSplit& eval, std::ostream* log = nullptr);

struct StepRecord {
  std::size_t step = 0;
  int epoch = 0;
  double memory = 0.0;
  double kd = 0.0;
  double expected_bits = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double memory = 0.0;  // means over the epoch's steps
  double kd = 0.0;
  double expected_bits = 0.0;  // at the end of the epoch
  double hard_bits = 0.0;      // average bits of the argmax policy at the end of the epoch
  double pruned_fraction = 0.0;
  double soft_accuracy = 0.0;
  bool search_active = true;
};

struct TrajectoryRecord {
  int epoch = 0;
  std::size_t layer = 0;
  std::size_t group = 0;
  std::vector<int> bits;
  std::vector<float> pi;
};

struct CompressResult {
  DeskCnn student{0};
  CompressionPolicy policy;
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  std::vector<ShiftEvent> shifts;
  std::vector<TrajectoryRecord> trajectory;
  double pruned_fraction = 0.0;
  double soft_accuracy = 0.0;  // final soft-mode accuracy on the eval split
  double hard_accuracy = 0.0;  // frozen policy, hard mode
  double min_max_pi = 0.0;     // smallest max-pi over all modules at the end
};

// Fine-tunes a copy of `baseline` with the learnable compressor in soft mode
// against the baseline as KD teacher, refitting PCA and the partition every
// refit_every epochs, and freezes the argmax policy.
CompressResult compress(const RunConfig& cfg, const DeskCnn& baseline, const DatasetSplit& train,
                        const DatasetSplit& eval, std::ostream* log = nullptr);

struct EvalReport {
  double accuracy = 0.0;
  double avg_bits = 0.0;
  std::size_t samples = 0;
};

// Hard-mode inference with a frozen policy. Throws if the policy does not fit
// the model's compressed activations.
EvalReport evaluate(const CompressionPolicy& policy, const DeskCnn& model, const DatasetSplit& data,
                    const RunConfig& cfg);

// Top-1 accuracy of `model` under an arbitrary hook (nullptr = uncompressed).
double accuracy_with(const DeskCnn& model, const DatasetSplit& data, const RunConfig& cfg,
                     const ActivationHook* hook);

struct SweepCell {
  double p = 0.0;
  int groups = 0;
  double avg_bits = 0.0;
  double accuracy = 0.0;
};

std::vector<SweepCell> sweep(const RunConfig& cfg, const DeskCnn& baseline, const DatasetSplit& train,
                             const DatasetSplit& eval, std::span<const double> ps,
                             std::span<const int> groups, std::ostream* log = nullptr);

// Cells not dominated by another cell with fewer-or-equal bits and higher-or-equal
// accuracy, sorted by ascending bits.
std::vector<SweepCell> pareto_frontier(std::vector<SweepCell> cells);

// CSV emission. Column headers:
//   baseline.csv      epoch,lr,loss,train_accuracy
//   steps.csv         step,epoch,L_memory,L_KD,expected_avg_bits
//   epochs.csv        epoch,L_memory,L_KD,expected_avg_bits,hard_avg_bits,pruned_fraction,soft_accuracy,search_active
//   shifts.csv        step,layer,group,old_bits,new_bits,applied
//   trajectory.csv    epoch,layer,group,b1,b2,b3,pi1,pi2,pi3
//   final_bits.csv    layer,group,channels,bits
//   summary.csv       key,value
//   sweep.csv / frontier.csv   p,G,avg_bits,accuracy
std::string baseline_csv(const BaselineResult& r);
std::string steps_csv(const CompressResult& r);
std::string epochs_csv(const CompressResult& r);
std::string shifts_csv(const CompressResult& r);
std::string trajectory_csv(const CompressResult& r);
std::string final_bits_csv(const CompressionPolicy& p);
std::string sweep_csv(std::span<const SweepCell> cells);

struct SummaryEntry {
  std::string key;
  std::string value;
};
std::string summary_csv(std::span<const SummaryEntry> entries);

// Files a finished run directory must contain, with their header lines.
struct RunFile {
  std::string name;
  std::string header;
};
std::vector<RunFile> run_files();

std::string format_double(double v);

}  // namespace acomp
