#include "acomp/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "acomp/losses.hpp"
#include "acomp/ops.hpp"
#include "acomp/optim.hpp"
#include "acomp/partition.hpp"
#include "acomp/transform.hpp"

namespace acomp {

namespace {

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

std::vector<std::size_t> eval_indices(const DatasetSplit& data, const RunConfig& cfg) {
  std::size_t n = data.count;
  if (cfg.eval_samples > 0) n = std::min(n, static_cast<std::size_t>(cfg.eval_samples));
  return iota_indices(n);
}

void check_finite(const Tensor& loss, const std::string& where) {
  if (!std::isfinite(loss.item())) {
    throw std::runtime_error(where + ": loss became " + std::to_string(loss.item()) + ", aborting");
  }
}

double label_accuracy(std::span<const int> pred, const DatasetSplit& data,
                      std::span<const std::size_t> idx) {
  if (idx.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) hit += pred[i] == data.labels[idx[i]];
  return 100.0 * static_cast<double>(hit) / static_cast<double>(idx.size());
}

// Mixes the run seed with a stream tag so every random consumer is independent.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// BN outputs of every compressed layer for the given images, stacked per layer.
std::vector<Tensor> capture_activations(const DeskCnn& model, const DatasetSplit& data,
                                        std::span<const std::size_t> idx, int weight_bits) {
  const auto& dims = model.activation_dims();
  std::vector<std::vector<float>> store(dims.size());
  ActivationHook hook = [&](std::size_t l, const Tensor& a) {
    store[l].insert(store[l].end(), a.values().begin(), a.values().end());
    return a;
  };
  ForwardOptions fo;
  fo.weight_bits = weight_bits;
  fo.hook = &hook;
  NoGradGuard guard;
  for (std::size_t s = 0; s < idx.size(); s += 128) {
    const auto chunk = idx.subspan(s, std::min<std::size_t>(128, idx.size() - s));
    model.forward(make_batch(data, chunk, model.normalization), fo);
  }
  std::vector<Tensor> out;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    out.emplace_back(Shape{idx.size(), dims[l].channels, dims[l].height, dims[l].width}, std::move(store[l]));
  }
  return out;
}

// Pruned channel count per layer for the first k entries of the removal log.
std::vector<std::size_t> prefix_counts(const SelectionState& s, std::size_t k) {
  std::vector<std::size_t> counts(s.layers.size(), 0);
  for (std::size_t i = 0; i < k && i < s.log.size(); ++i) ++counts[s.log[i].layer];
  return counts;
}

PatienceMode patience_mode(const std::string& s) {
  return s == "cumulative" ? PatienceMode::cumulative : PatienceMode::consecutive;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double accuracy_with(const DeskCnn& model, const DatasetSplit& data, const RunConfig& cfg,
                     const ActivationHook* hook) {
  const auto idx = eval_indices(data, cfg);
  ForwardOptions fo;
  fo.weight_bits = cfg.weight_bits;
  fo.hook = hook;
  const auto pred = predict(model, data, idx, fo);
  return label_accuracy(pred, data, idx);
}

BaselineResult train_baseline(const RunConfig& cfg, const DatasetSplit& train,
                              const DatasetSplit& eval, std::ostream* log) {
  cfg.validate();
  train.validate();
  BaselineResult r;
  r.model = DeskCnn(cfg.seed, cfg.num_classes, train.channels, train.height);
  r.model.normalization = Normalization::from(train);
  std::mt19937_64 rng(stream_seed(cfg.seed, 1));
  Sgd opt(r.model.parameters(), static_cast<float>(cfg.baseline_lr), static_cast<float>(cfg.momentum));
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t steps_per_epoch = (train.count + bs - 1) / bs;
  const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(cfg.baseline_epochs);
  auto order = iota_indices(train.count);
  std::size_t step = 0;
  for (int epoch = 0; epoch < cfg.baseline_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t hit = 0;
    double lr = 0.0;
    for (std::size_t s = 0; s < train.count; s += bs, ++step) {
      const std::span<const std::size_t> chunk(order.data() + s, std::min(bs, train.count - s));
      lr = cfg.baseline_lr * 0.5 *
           (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(total_steps)));
      opt.set_lr(static_cast<float>(lr));
      ForwardOptions fo;
      fo.train_bn = true;
      const Tensor logits = r.model.forward(make_batch(train, chunk, r.model.normalization), fo);
      const auto labels = batch_labels(train, chunk);
      const Tensor loss = cross_entropy(logits, labels);
      check_finite(loss, "baseline epoch " + std::to_string(epoch + 1) + " step " + std::to_string(step) +
                             " (lr " + format_double(lr) + ")");
      opt.zero_grad();
      loss.backward();
      opt.step();
      loss_sum += loss.item() * static_cast<double>(chunk.size());
      const auto k = static_cast<std::size_t>(cfg.num_classes);
      for (std::size_t i = 0; i < chunk.size(); ++i) {
        const float* row = logits.values().data() + i * k;
        hit += static_cast<int>(std::max_element(row, row + k) - row) == labels[i];
      }
    }
    BaselineEpoch e{epoch + 1, lr, loss_sum / static_cast<double>(train.count),
                    100.0 * static_cast<double>(hit) / static_cast<double>(train.count)};
    r.epochs.push_back(e);
    if (log) *log << "baseline epoch " << e.epoch << " loss " << e.loss << " train acc " << e.train_accuracy << "\n";
  }
  {
    const auto idx = eval_indices(eval, cfg);
    ForwardOptions fo;
    r.float_accuracy = label_accuracy(predict(r.model, eval, idx, fo), eval, idx);
  }
  r.model.quantize_weights(cfg.weight_bits);
  r.accuracy = accuracy_with(r.model, eval, cfg, nullptr);
  if (log) *log << "baseline float acc " << r.float_accuracy << " " << cfg.weight_bits << "-bit acc " << r.accuracy << "\n";
  return r;
}

CompressResult compress(const RunConfig& cfg, const DeskCnn& baseline, const DatasetSplit& train,
                        const DatasetSplit& eval, std::ostream* log) {
  cfg.validate();
  train.validate();
  CompressResult r;
  const DeskCnn& teacher = baseline;
  r.student = baseline.clone();
  DeskCnn& student = r.student;
  const auto& dims = student.activation_dims();
  const std::size_t groups = static_cast<std::size_t>(cfg.groups);

  std::mt19937_64 rng(stream_seed(cfg.seed, 2));
  auto pool = iota_indices(train.count);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<std::size_t> subset(pool.begin(),
                                  pool.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(
                                                     pool.size(), static_cast<std::size_t>(cfg.finetune_samples))));
  std::vector<std::size_t> pca_idx(subset.begin(),
                                   subset.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(
                                                        subset.size(), static_cast<std::size_t>(cfg.pca_samples))));

  ForwardOptions teacher_fo;
  teacher_fo.weight_bits = cfg.weight_bits;
  const auto k = static_cast<std::size_t>(cfg.num_classes);
  const auto teacher_logits = logits_of(teacher, train, subset, teacher_fo);
  std::vector<std::size_t> position(train.count, 0);
  for (std::size_t i = 0; i < subset.size(); ++i) position[subset[i]] = i;
  const auto teacher_pca_pred = predict(teacher, train, pca_idx, teacher_fo);

  ActivationCompressor comp(dims, groups, cfg.init_bits, static_cast<float>(cfg.calib_decay));
  ActivationHook hook = comp.hook();
  const bool search_enabled = cfg.branches == 3;
  std::vector<SearchState> search;
  if (search_enabled) {
    const SearchConfig sc{cfg.patience, cfg.b_min, patience_mode(cfg.patience_mode)};
    for (std::size_t l = 0; l < dims.size(); ++l)
      for (std::size_t g = 0; g + 1 < groups; ++g) search.emplace_back(comp.module(l, g), sc);
  }

  Sgd weight_opt(student.parameters(), static_cast<float>(cfg.lr), static_cast<float>(cfg.momentum));
  Sgd arch_opt(comp.arch_params(), static_cast<float>(cfg.arch_lr), static_cast<float>(cfg.momentum));
  const LossConfig loss_cfg{static_cast<float>(cfg.p), static_cast<float>(comp.total_values())};
  const auto explicit_t = cfg.explicit_thresholds();
  std::vector<double> thresholds;

  auto refit = [&](int epoch) {
    NoGradGuard guard;
    const auto samples = capture_activations(student, train, pca_idx, cfg.weight_bits);
    std::vector<TransformCache> transforms;
    std::vector<LayerSpectrum> spectra;
    for (std::size_t l = 0; l < dims.size(); ++l) {
      try {
        transforms.push_back(fit_pca(samples[l], l));
      } catch (const std::exception& e) {
        throw std::runtime_error("layer " + std::to_string(l) + " pca: " + e.what());
      }
      spectra.push_back(LayerSpectrum::from_eigenvalues(transforms.back().eigenvalues, dims[l].plane()));
    }
    comp.set_transforms(transforms);
    SelectionState sel(spectra);
    greedy_rank(sel, sel.removable());
    if (thresholds.empty()) {
      if (!explicit_t.empty()) {
        thresholds = explicit_t;
      } else {
        // Largest log prefix whose pruning keeps teacher agreement within dr_budget.
        ForwardOptions fo;
        fo.weight_bits = cfg.weight_bits;
        auto drop = [&](std::size_t n) {
          const auto counts = prefix_counts(sel, n);
          ActivationHook prune = [&](std::size_t l, const Tensor& a) {
            return prune_trailing(a, transforms[l], counts[l]);
          };
          fo.hook = &prune;
          return 100.0 - agreement(predict(student, train, pca_idx, fo), teacher_pca_pred);
        };
        std::size_t lo = 0, hi = sel.log.size();
        while (lo < hi) {
          const std::size_t mid = (lo + hi + 1) / 2;
          if (drop(mid) <= cfg.dr_budget) lo = mid;
          else hi = mid - 1;
        }
        r.pruned_fraction = static_cast<double>(lo) / static_cast<double>(sel.total_channels());
        thresholds = default_thresholds(groups, r.pruned_fraction);
        if (log) *log << "dr probe: pruning " << lo << " of " << sel.total_channels() << " channels\n";
      }
    }
    comp.set_partition(build_partition(sel, thresholds));
    std::size_t pruned = 0, total = 0;
    for (const auto& lg : comp.partition().layers) {
      pruned += lg.pruned();
      total += lg.channels;
    }
    r.pruned_fraction = static_cast<double>(pruned) / static_cast<double>(total);
    if (log) *log << "epoch " << epoch + 1 << " refit: pruned fraction " << r.pruned_fraction << "\n";
  };

  auto snapshot = [&](int epoch) {
    for (std::size_t l = 0; l < dims.size(); ++l) {
      for (std::size_t g = 0; g + 1 < groups; ++g) {
        const auto& m = comp.module(l, g);
        r.trajectory.push_back({epoch, l, g, m.bits, m.mixing_weights()});
      }
    }
  };

  auto hard_bits = [&]() {
    double stored = 0.0;
    for (std::size_t l = 0; l < dims.size(); ++l)
      for (std::size_t g = 0; g + 1 < groups; ++g)
        stored += comp.module(l, g).chosen_bits() *
                  static_cast<double>(comp.partition().layers[l].group_size(g) * dims[l].plane());
    return stored / static_cast<double>(comp.total_values());
  };

  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t steps_per_epoch = (subset.size() + bs - 1) / bs;
  const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(cfg.epochs);
  const std::size_t settle_steps = static_cast<std::size_t>(cfg.settle_epochs) * steps_per_epoch;
  std::size_t settle_step = 0;
  // Geometric anneal from 1 to settle_temperature over the settle epochs, so
  // the soft mix converges onto its argmax branch before the policy is frozen.
  auto anneal = [&]() {
    ++settle_step;
    const double t = std::pow(cfg.settle_temperature,
                              static_cast<double>(settle_step) / static_cast<double>(settle_steps));
    for (std::size_t l = 0; l < dims.size(); ++l)
      for (std::size_t g = 0; g + 1 < groups; ++g) comp.module(l, g).temperature = static_cast<float>(t);
  };
  std::size_t step = 0;
  snapshot(0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch % cfg.refit_every == 0) refit(epoch);
    const bool search_active = search_enabled && epoch < cfg.epochs - cfg.settle_epochs;
    std::shuffle(subset.begin(), subset.end(), rng);
    comp.mode = CompressMode::soft;
    comp.track_ranges = true;
    double mem_sum = 0.0, kd_sum = 0.0;
    std::size_t steps_this_epoch = 0;
    for (std::size_t s = 0; s < subset.size(); s += bs, ++step, ++steps_this_epoch) {
      const std::span<const std::size_t> chunk(subset.data() + s, std::min(bs, subset.size() - s));
      if (epoch >= cfg.epochs - cfg.settle_epochs) anneal();
      weight_opt.set_lr(static_cast<float>(
          cfg.lr * 0.5 *
          (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(total_steps)))));
      std::vector<float> tl(chunk.size() * k);
      for (std::size_t i = 0; i < chunk.size(); ++i) {
        const float* src = teacher_logits.data() + position[chunk[i]] * k;
        std::copy(src, src + k, tl.begin() + static_cast<std::ptrdiff_t>(i * k));
      }
      ForwardOptions fo;
      fo.weight_bits = cfg.weight_bits;
      fo.hook = &hook;
      const Tensor logits = student.forward(make_batch(train, chunk, student.normalization), fo);
      const Tensor kd = kd_loss(logits, Tensor(Shape{chunk.size(), k}, std::move(tl)));
      const auto footprints = comp.footprints();
      const Tensor mem = memory_loss(footprints, loss_cfg);
      const Tensor loss = total_loss(mem, kd);
      check_finite(loss, "compress epoch " + std::to_string(epoch + 1) + " step " + std::to_string(step));
      weight_opt.zero_grad();
      arch_opt.zero_grad();
      loss.backward();
      weight_opt.step();
      arch_opt.step();
      if (search_active) {
        std::size_t i = 0;
        for (std::size_t l = 0; l < dims.size(); ++l) {
          for (std::size_t g = 0; g + 1 < groups; ++g, ++i) {
            auto& m = comp.module(l, g);
            if (auto ev = observe(search[i], m, step)) {
              if (ev->applied) arch_opt.reset_momentum(m.beta);
              r.shifts.push_back(*ev);
            }
          }
        }
      }
      mem_sum += mem.item();
      kd_sum += kd.item();
      r.steps.push_back({step, epoch + 1, mem.item(), kd.item(), comp.expected_avg_bits()});
    }
    comp.track_ranges = false;
    EpochRecord e;
    e.epoch = epoch + 1;
    e.memory = mem_sum / static_cast<double>(std::max<std::size_t>(1, steps_this_epoch));
    e.kd = kd_sum / static_cast<double>(std::max<std::size_t>(1, steps_this_epoch));
    e.expected_bits = comp.expected_avg_bits();
    e.hard_bits = hard_bits();
    e.pruned_fraction = r.pruned_fraction;
    e.soft_accuracy = accuracy_with(student, eval, cfg, &hook);
    e.search_active = search_active;
    r.epochs.push_back(e);
    snapshot(epoch + 1);
    if (log) {
      *log << "epoch " << e.epoch << " kd " << e.kd << " memory " << e.memory << " expected bits "
           << e.expected_bits << " hard bits " << e.hard_bits << " soft acc " << e.soft_accuracy << "\n";
    }
  }

  student.quantize_weights(cfg.weight_bits);
  comp.mode = CompressMode::soft;
  r.soft_accuracy = accuracy_with(student, eval, cfg, &hook);
  r.min_max_pi = 1.0;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    for (std::size_t g = 0; g + 1 < groups; ++g) {
      const auto pi = comp.module(l, g).mixing_weights();
      r.min_max_pi = std::min<double>(r.min_max_pi, *std::max_element(pi.begin(), pi.end()));
    }
  }
  r.policy = comp.freeze(cfg.b_min, cfg.seed, config_hash(cfg));
  r.hard_accuracy = evaluate(r.policy, student, eval, cfg).accuracy;
  if (log) {
    *log << "policy avg bits " << r.policy.avg_bits << " hard acc " << r.hard_accuracy << " soft acc "
         << r.soft_accuracy << " min max-pi " << r.min_max_pi << "\n";
  }
  return r;
}

EvalReport evaluate(const CompressionPolicy& policy, const DeskCnn& model, const DatasetSplit& data,
                    const RunConfig& cfg) {
  policy.validate();
  const auto& dims = model.activation_dims();
  if (policy.layers.size() != dims.size()) {
    throw std::runtime_error("evaluate: policy has " + std::to_string(policy.layers.size()) +
                             " layers, model compresses " + std::to_string(dims.size()));
  }
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const auto& pd = policy.layers[l].dims;
    if (pd.channels != dims[l].channels || pd.height != dims[l].height || pd.width != dims[l].width) {
      throw std::runtime_error("evaluate: policy layer " + std::to_string(l) + " is " +
                               std::to_string(pd.channels) + "x" + std::to_string(pd.height) + "x" +
                               std::to_string(pd.width) + ", model activation is " +
                               std::to_string(dims[l].channels) + "x" + std::to_string(dims[l].height) +
                               "x" + std::to_string(dims[l].width));
    }
  }
  auto comp = ActivationCompressor::from_policy(policy);
  const ActivationHook hook = comp.hook();
  EvalReport rep;
  rep.accuracy = accuracy_with(model, data, cfg, &hook);
  rep.avg_bits = policy.recompute_avg_bits();
  rep.samples = eval_indices(data, cfg).size();
  return rep;
}

std::vector<SweepCell> sweep(const RunConfig& cfg, const DeskCnn& baseline, const DatasetSplit& train,
                             const DatasetSplit& eval, std::span<const double> ps,
                             std::span<const int> groups, std::ostream* log) {
  std::vector<SweepCell> cells;
  for (int g : groups) {
    for (double p : ps) {
      RunConfig c = cfg;
      c.p = p;
      c.groups = g;
      if (c.thresholds != "auto" && static_cast<int>(c.explicit_thresholds().size()) != g - 1) {
        throw std::invalid_argument("sweep: explicit thresholds do not fit G=" + std::to_string(g) +
                                    "; use thresholds = auto");
      }
      if (log) *log << "sweep cell p=" << p << " G=" << g << "\n";
      const auto res = compress(c, baseline, train, eval, log);
      cells.push_back({p, g, res.policy.avg_bits, res.hard_accuracy});
    }
  }
  return cells;
}

std::vector<SweepCell> pareto_frontier(std::vector<SweepCell> cells) {
  std::stable_sort(cells.begin(), cells.end(), [](const SweepCell& a, const SweepCell& b) {
    if (a.avg_bits != b.avg_bits) return a.avg_bits < b.avg_bits;
    return a.accuracy > b.accuracy;
  });
  std::vector<SweepCell> front;
  for (const auto& c : cells) {
    if (front.empty() || c.accuracy > front.back().accuracy) front.push_back(c);
  }
  return front;
}

std::string baseline_csv(const BaselineResult& r) {
  std::ostringstream o;
  o << "epoch,lr,loss,train_accuracy\n";
  for (const auto& e : r.epochs) {
    o << e.epoch << ',' << format_double(e.lr) << ',' << format_double(e.loss) << ','
      << format_double(e.train_accuracy) << '\n';
  }
  return o.str();
}

std::string steps_csv(const CompressResult& r) {
  std::ostringstream o;
  o << "step,epoch,L_memory,L_KD,expected_avg_bits\n";
  for (const auto& s : r.steps) {
    o << s.step << ',' << s.epoch << ',' << format_double(s.memory) << ',' << format_double(s.kd) << ','
      << format_double(s.expected_bits) << '\n';
  }
  return o.str();
}

std::string epochs_csv(const CompressResult& r) {
  std::ostringstream o;
  o << "epoch,L_memory,L_KD,expected_avg_bits,hard_avg_bits,pruned_fraction,soft_accuracy,search_active\n";
  for (const auto& e : r.epochs) {
    o << e.epoch << ',' << format_double(e.memory) << ',' << format_double(e.kd) << ','
      << format_double(e.expected_bits) << ',' << format_double(e.hard_bits) << ','
      << format_double(e.pruned_fraction) << ',' << format_double(e.soft_accuracy) << ','
      << (e.search_active ? 1 : 0) << '\n';
  }
  return o.str();
}

std::string shifts_csv(const CompressResult& r) {
  std::ostringstream o;
  o << "step,layer,group,old_bits,new_bits,applied\n";
  for (const auto& s : r.shifts) {
    o << s.step << ',' << s.layer << ',' << s.group + 1 << ',' << join_ints(s.old_bits) << ','
      << join_ints(s.new_bits) << ',' << (s.applied ? 1 : 0) << '\n';
  }
  return o.str();
}

std::string trajectory_csv(const CompressResult& r) {
  std::ostringstream o;
  o << "epoch,layer,group,b1,b2,b3,pi1,pi2,pi3\n";
  for (const auto& t : r.trajectory) {
    o << t.epoch << ',' << t.layer << ',' << t.group + 1;
    for (std::size_t i = 0; i < 3; ++i) o << ',' << (i < t.bits.size() ? std::to_string(t.bits[i]) : "");
    for (std::size_t i = 0; i < 3; ++i) o << ',' << (i < t.pi.size() ? format_double(t.pi[i]) : "");
    o << '\n';
  }
  return o.str();
}

std::string final_bits_csv(const CompressionPolicy& p) {
  std::ostringstream o;
  o << "layer,group,channels,bits\n";
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& pl = p.layers[l];
    for (std::size_t g = 0; g < pl.groups.groups(); ++g) {
      const bool pruned = g + 1 == pl.groups.groups();
      o << l << ',' << g + 1 << ',' << pl.groups.group_size(g) << ',' << (pruned ? 0 : pl.bits[g]) << '\n';
    }
  }
  return o.str();
}

std::string sweep_csv(std::span<const SweepCell> cells) {
  std::ostringstream o;
  o << "p,G,avg_bits,accuracy\n";
  for (const auto& c : cells) {
    o << format_double(c.p) << ',' << c.groups << ',' << format_double(c.avg_bits) << ','
      << format_double(c.accuracy) << '\n';
  }
  return o.str();
}

std::string summary_csv(std::span<const SummaryEntry> entries) {
  std::ostringstream o;
  o << "key,value\n";
  for (const auto& e : entries) o << e.key << ',' << e.value << '\n';
  return o.str();
}

std::vector<RunFile> run_files() {
  return {
      {"steps.csv", "step,epoch,L_memory,L_KD,expected_avg_bits"},
      {"epochs.csv",
       "epoch,L_memory,L_KD,expected_avg_bits,hard_avg_bits,pruned_fraction,soft_accuracy,search_active"},
      {"shifts.csv", "step,layer,group,old_bits,new_bits,applied"},
      {"trajectory.csv", "epoch,layer,group,b1,b2,b3,pi1,pi2,pi3"},
      {"final_bits.csv", "layer,group,channels,bits"},
      {"summary.csv", "key,value"},
  };
}

}  // namespace acomp
