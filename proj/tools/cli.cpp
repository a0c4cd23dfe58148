#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "acomp/binary_io.hpp"
#include "acomp/checkpoint.hpp"
#include "acomp/config.hpp"
#include "acomp/dataset.hpp"
#include "acomp/pipeline.hpp"
#include "acomp/policy.hpp"

namespace fs = std::filesystem;

namespace acomp::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> p;
  std::optional<int> groups;
  std::optional<int> patience;
  std::optional<int> epochs;
  std::optional<int> bmin;
  std::vector<std::string> sets;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "flat key = value run config")->required();
  cmd->add_option("--seed", o.seed, "seed for every random stream");
  cmd->add_option("--p", o.p, "memory-loss weight");
  cmd->add_option("--groups", o.groups, "G, the last group is pruned");
  cmd->add_option("--patience", o.patience, "dynamic-search patience");
  cmd->add_option("--epochs", o.epochs, "fine-tuning epochs");
  cmd->add_option("--bmin", o.bmin, "lowest bit-width the search may reach");
  cmd->add_option("--set", o.sets, "any other field, as key=value (repeatable)");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

// Relative data paths are taken relative to the config file.
RunConfig load(const Overrides& o) {
  RunConfig cfg = load_config(o.config);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    set_config_field(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.p) cfg.p = *o.p;
  if (o.groups) cfg.groups = *o.groups;
  if (o.patience) cfg.patience = *o.patience;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.bmin) cfg.b_min = *o.bmin;
  cfg.validate();
  const fs::path base = fs::path(o.config).parent_path();
  cfg.train_data = resolve(base, cfg.train_data).string();
  cfg.eval_data = resolve(base, cfg.eval_data).string();
  return cfg;
}

DatasetSplit load_split(const RunConfig& cfg, bool train) {
  DatasetSplit s = load_dataset(train ? cfg.train_data : cfg.eval_data,
                                parse_dataset_format(cfg.data_format), cfg.num_classes);
  s.train = train;
  return s;
}

DeskCnn load_model(const RunConfig& cfg, const fs::path& path) {
  if (!fs::exists(path)) throw std::runtime_error("checkpoint " + path.string() + " does not exist");
  DeskCnn m(cfg.seed, cfg.num_classes);
  m.load(load_checkpoint(path));
  return m;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string split_list_usage(const std::string& what) { return what + " expects a comma-separated list"; }

template <class T>
std::vector<T> parse_list(const std::string& s, const std::string& what) {
  std::vector<T> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::istringstream v(item);
    T x{};
    if (!(v >> x) || !v.eof()) throw UsageError(split_list_usage(what));
    out.push_back(x);
  }
  if (out.empty()) throw UsageError(split_list_usage(what));
  return out;
}

std::string first_line(const std::string& s) {
  const auto nl = s.find('\n');
  return nl == std::string::npos ? s : s.substr(0, nl);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"learnable mixed-precision and PCA activation compression"};
  app.require_subcommand(1);

  Overrides ov;
  std::string out_dir = "run";
  std::string checkpoint, policy_path, out_file, grid_p = "0.01,0.02,0.05,0.1,0.2", grid_g = "2,3";
  std::size_t n_train = 5000, n_eval = 1000;
  std::uint64_t data_seed = 1;
  std::string data_format = "idx";
  bool as_json = false;

  auto* mk = app.add_subcommand("make-dataset", "write the procedural shapes dataset");
  mk->add_option("--out-dir", out_dir, "output directory (train and eval prefixes)");
  mk->add_option("--train", n_train, "training images");
  mk->add_option("--eval", n_eval, "evaluation images");
  mk->add_option("--seed", data_seed, "generator seed");
  mk->add_option("--format", data_format, "idx or raw")->check(CLI::IsMember({"idx", "raw"}));

  auto* dc = app.add_subcommand("default-config", "print a complete config with default values");
  dc->add_option("--out", out_file, "write to a file instead of stdout");

  auto* tb = app.add_subcommand("train-baseline", "train the float CNN and snap its weights");
  add_config_flags(tb, ov);
  tb->add_option("--out-dir", out_dir, "run directory");

  auto* cp = app.add_subcommand("compress", "learn a compression policy against the baseline");
  add_config_flags(cp, ov);
  cp->add_option("--out-dir", out_dir, "run directory");
  cp->add_option("--checkpoint", checkpoint, "baseline checkpoint (default <out-dir>/baseline.ckpt)");

  auto* ev = app.add_subcommand("evaluate", "hard-mode accuracy of a frozen policy");
  add_config_flags(ev, ov);
  ev->add_option("--policy", policy_path, "policy file")->required();
  ev->add_option("--checkpoint", checkpoint, "model checkpoint")->required();

  auto* sw = app.add_subcommand("sweep", "compress over a (p, G) grid");
  add_config_flags(sw, ov);
  sw->add_option("--out-dir", out_dir, "run directory");
  sw->add_option("--checkpoint", checkpoint, "baseline checkpoint (default <out-dir>/baseline.ckpt)");
  sw->add_option("--grid-p", grid_p, "comma-separated p values");
  sw->add_option("--grid-groups", grid_g, "comma-separated G values");

  auto* ex = app.add_subcommand("export-policy", "summarize a policy file");
  ex->add_option("--policy", policy_path, "policy file")->required();
  ex->add_flag("--json", as_json, "JSON instead of a table");
  ex->add_option("--out", out_file, "write to a file instead of stdout");

  auto* rp = app.add_subcommand("report", "check and summarize a finished run directory");
  rp->add_option("--out-dir", out_dir, "run directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << first_line(e.what()) << " (see --help)\n";
    return 2;
  }

  try {
    if (mk->parsed()) {
      const fs::path dir(out_dir);
      const auto train = make_synthetic_dataset(n_train, data_seed, true);
      const auto eval = make_synthetic_dataset(n_eval, data_seed + 1, false);
      if (data_format == "idx") {
        save_idx(train, dir / "train");
        save_idx(eval, dir / "eval");
      } else {
        save_raw(train, dir / "train.raw");
        save_raw(eval, dir / "eval.raw");
      }
      out << "wrote " << n_train << " train and " << n_eval << " eval images to " << dir.string() << "\n";
      return 0;
    }
    if (dc->parsed()) {
      const std::string text = emit_config(RunConfig{});
      if (out_file.empty()) out << text;
      else write_file_atomic(out_file, text);
      return 0;
    }
    if (ex->parsed()) {
      const auto policy = load_policy(policy_path);
      std::string text;
      if (as_json) {
        text = policy_json(policy) + "\n";
      } else {
        text = final_bits_csv(policy) + "avg_bits," + fixed(policy.avg_bits, 6) + "\n";
      }
      if (out_file.empty()) out << text;
      else write_file_atomic(out_file, text);
      return 0;
    }
    if (rp->parsed()) {
      const fs::path dir(out_dir);
      bool ok = true;
      for (const auto& f : run_files()) {
        const fs::path path = dir / f.name;
        if (!fs::exists(path)) {
          err << "report: missing " << path.string() << "\n";
          ok = false;
          continue;
        }
        const std::string header = first_line(read_file(path));
        if (header != f.header) {
          err << "report: " << path.string() << " has header '" << header << "', expected '" << f.header << "'\n";
          ok = false;
        }
      }
      if (!ok) return 1;
      out << read_file(dir / "summary.csv");
      return 0;
    }

    const RunConfig cfg = load(ov);
    const fs::path dir(out_dir);

    if (tb->parsed()) {
      const auto train = load_split(cfg, true);
      const auto eval = load_split(cfg, false);
      const auto r = train_baseline(cfg, train, eval, &err);
      save_checkpoint(dir / "baseline.ckpt", r.model.state());
      write_file_atomic(dir / "baseline.csv", baseline_csv(r));
      write_file_atomic(dir / "config.cfg", emit_config(cfg));
      const std::vector<SummaryEntry> summary{
          {"seed", std::to_string(cfg.seed)},
          {"float_accuracy", format_double(r.float_accuracy)},
          {"A0", format_double(r.accuracy)},
      };
      write_file_atomic(dir / "baseline_summary.csv", summary_csv(summary));
      out << "float_accuracy " << fixed(r.float_accuracy, 2) << "\nA0 " << fixed(r.accuracy, 2) << "\n";
      return 0;
    }

    if (ev->parsed()) {
      const auto policy = load_policy(policy_path);
      const auto model = load_model(cfg, checkpoint);
      const auto eval = load_split(cfg, false);
      const auto rep = evaluate(policy, model, eval, cfg);
      out << "avg_bits " << fixed(rep.avg_bits, 6) << "\naccuracy " << fixed(rep.accuracy, 2) << "\nsamples "
          << rep.samples << "\n";
      return 0;
    }

    const fs::path ckpt = checkpoint.empty() ? dir / "baseline.ckpt" : fs::path(checkpoint);
    const auto baseline = load_model(cfg, ckpt);
    const auto train = load_split(cfg, true);
    const auto eval = load_split(cfg, false);

    if (cp->parsed()) {
      const double a0 = accuracy_with(baseline, eval, cfg, nullptr);
      const auto r = compress(cfg, baseline, train, eval, &err);
      save_policy(dir / "policy.bin", r.policy);
      save_checkpoint(dir / "student.ckpt", r.student.state());
      write_file_atomic(dir / "config.cfg", emit_config(cfg));
      write_file_atomic(dir / "steps.csv", steps_csv(r));
      write_file_atomic(dir / "epochs.csv", epochs_csv(r));
      write_file_atomic(dir / "shifts.csv", shifts_csv(r));
      write_file_atomic(dir / "trajectory.csv", trajectory_csv(r));
      write_file_atomic(dir / "final_bits.csv", final_bits_csv(r.policy));
      std::size_t applied = 0;
      for (const auto& s : r.shifts) applied += s.applied ? 1 : 0;
      const std::vector<SummaryEntry> summary{
          {"seed", std::to_string(cfg.seed)},
          {"p", format_double(cfg.p)},
          {"groups", std::to_string(cfg.groups)},
          {"A0", format_double(a0)},
          {"avg_bits", format_double(r.policy.avg_bits)},
          {"hard_accuracy", format_double(r.hard_accuracy)},
          {"soft_accuracy", format_double(r.soft_accuracy)},
          {"min_max_pi", format_double(r.min_max_pi)},
          {"pruned_fraction", format_double(r.pruned_fraction)},
          {"shifts_applied", std::to_string(applied)},
      };
      write_file_atomic(dir / "summary.csv", summary_csv(summary));
      out << "avg_bits " << fixed(r.policy.avg_bits, 6) << "\nhard_accuracy " << fixed(r.hard_accuracy, 2)
          << "\nsoft_accuracy " << fixed(r.soft_accuracy, 2) << "\nA0 " << fixed(a0, 2) << "\n";
      return 0;
    }

    if (sw->parsed()) {
      const auto ps = parse_list<double>(grid_p, "--grid-p");
      const auto gs = parse_list<int>(grid_g, "--grid-groups");
      const auto cells = sweep(cfg, baseline, train, eval, ps, gs, &err);
      write_file_atomic(dir / "sweep.csv", sweep_csv(cells));
      const auto front = pareto_frontier(cells);
      write_file_atomic(dir / "frontier.csv", sweep_csv(front));
      out << sweep_csv(cells);
      return 0;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << first_line(e.what()) << "\n";
    return 1;
  }
  return 2;
}

}  // namespace acomp::cli
