//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "molshift/cli/manifest.hpp"
#include "molshift/errors.hpp"
#include "molshift/featstats/features.hpp"
#include "molshift/featstats/normality.hpp"
#include "molshift/featstats/shift.hpp"
#include "molshift/trainpipe/dataset.hpp"
#include "molshift/trainpipe/metrics.hpp"
#include "molshift/trainpipe/run_config.hpp"
#include "molshift/trainpipe/train.hpp"

namespace molshift::cli {
namespace {

namespace fs = std::filesystem;

inline constexpr const char *kVersion = "0.1.0";

class UsageError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string data;
  std::string init_checkpoint;
  std::string out = "runs";
  std::string task;
  std::string metric = "MAE";
  std::string splits;
  int bins = kDefaultBins;
  int capture_layer = 1;
  std::vector<std::string> set;
  std::string features_a;
  std::string features_b;
  std::vector<std::string> features;
  std::string model_tag;
  std::string manifest;
};

// State shared by the command bodies.
struct Context {
  const Options &opts;
  std::ostream &out;
  std::ostream &err;
  Manifest manifest;
  fs::path run_dir;
};

std::string fmt(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string absolute(const std::string &path) {
  return fs::absolute(path).lexically_normal().string();
}

void require_file(const std::string &path, const char *flag) {
  if (path.empty())
    throw UsageError(std::string(flag) + " is required");
  if (!fs::exists(path))
    throw UsageError(std::string(flag) + ": no such file or directory: " + path);
}

void record_input(Context &ctx, const fs::path &path) {
  if (fs::is_directory(path)) {
    for (const auto &entry: fs::recursive_directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
        ctx.manifest.inputs[absolute(entry.path().string())] = sha256_file(entry.path());
    }
  } else {
    ctx.manifest.inputs[absolute(path.string())] = sha256_file(path);
  }
}

/// Defaults, then the config file, then each --set key=value, then --seed.
RunConfig resolve_run_config(Context &ctx) {
  RunConfig run;
  if (!ctx.opts.config.empty()) {
    require_file(ctx.opts.config, "--config");
    run = load_run_config(ctx.opts.config);
    record_input(ctx, ctx.opts.config);
  }
  for (const std::string &assignment: ctx.opts.set) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
      throw UsageError("--set expects key=value, got '" + assignment + "'");
    set_run_config_key(run, assignment.substr(0, eq), assignment.substr(eq + 1));
  }
  if (ctx.opts.seed)
    run.seed = *ctx.opts.seed;
  run.validate();
  if (!run.model_config.empty())
    record_input(ctx, run.model_config);
  ctx.manifest.config = run.to_map();
  return run;
}

std::vector<SplitRole> parse_splits(const std::string &text, std::vector<SplitRole> fallback) {
  if (text.empty())
    return fallback;
  std::vector<SplitRole> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      out.push_back(split_role_from_string(item));
    } catch (const DataError &e) {
      throw UsageError(std::string("--splits: ") + e.what());
    }
  }
  if (out.empty())
    throw UsageError("--splits is empty");
  return out;
}

bool is_atom_data(const std::string &path) {
  return fs::path(path).extension() == ".jsonl";
}

void write_history(const fs::path &path, const std::vector<EpochRecord> &history) {
  std::ofstream os(path);
  os << "epoch,train_loss,valid_loss,valid_metric\n";
  for (const EpochRecord &e: history)
    os << e.epoch << "," << fmt(e.train_loss) << "," << fmt(e.valid_loss) << ","
       << fmt(e.valid_metric) << "\n";
}

void write_origin(const fs::path &model_dir, ModelTag tag) {
  std::ofstream(model_dir / "origin.json") << nlohmann::json { { "model_tag", to_string(tag) } }.dump()
                                           << "\n";
}

std::optional<ModelTag> read_origin(const fs::path &model_dir) {
  std::ifstream in(model_dir / "origin.json");
  if (!in)
    return std::nullopt;
  try {
    return model_tag_from_string(nlohmann::json::parse(in).at("model_tag").get<std::string>());
  } catch (const nlohmann::json::exception &e) {
    throw DataError((model_dir / "origin.json").string() + ": " + e.what());
  }
}

fs::path model_dir_of(const std::string &path) {
  return fs::is_directory(path) ? fs::path(path) : fs::path(path).parent_path();
}

// Mean absolute error of task `t` over the atoms of records that carry it.
std::optional<double> atom_mae(const ModelBundle &bundle, const std::vector<AtomRecord> &records,
                               int t) {
  const std::string &name = bundle.tasks[static_cast<std::size_t>(t)].name;
  std::vector<AtomRecord> with;
  for (const AtomRecord &r: records) {
    if (r.props.count(name) > 0)
      with.push_back(r);
  }
  if (with.empty())
    return std::nullopt;
  const auto preds = predict_atoms(bundle, with, t);
  std::vector<double> p, y;
  for (std::size_t i = 0; i < with.size(); ++i) {
    const auto &truth = with[i].props.at(name);
    p.insert(p.end(), preds[i].begin(), preds[i].end());
    y.insert(y.end(), truth.begin(), truth.end());
  }
  return metric_mae(p, y);
}

std::vector<MetricRow> atom_metric_rows(const ModelBundle &bundle, const AtomDataset &data,
                                        std::uint64_t seed, const std::vector<SplitRole> &splits) {
  std::vector<MetricRow> rows;
  for (int t = 0; t < static_cast<int>(bundle.tasks.size()); ++t) {
    for (SplitRole s: splits) {
      if (auto mae = atom_mae(bundle, data[s], t))
        rows.push_back({ bundle.tasks[static_cast<std::size_t>(t)].name, seed, to_string(s), "MAE", *mae });
    }
  }
  return rows;
}

std::vector<MetricRow> mol_metric_rows(const ModelBundle &bundle, const MolDataset &data,
                                       std::uint64_t seed, const std::vector<SplitRole> &splits,
                                       std::ostream &err) {
  std::vector<MetricRow> rows;
  const TaskInfo &task = bundle.tasks.at(0);
  const Metric metric = task.metric.value_or(Metric::kMae);
  for (SplitRole s: splits) {
    if (data[s].size() < 2) {
      err << "molshift: note: split " << to_string(s) << " has fewer than 2 molecules; skipped\n";
      continue;
    }
    rows.push_back({ task.name, seed, to_string(s), to_string(metric),
                     evaluate_molecules(bundle, data[s]) });
  }
  return rows;
}

std::string describe_metrics(const std::vector<MetricRow> &rows) {
  std::string s;
  for (const MetricRow &r: rows)
    s += (s.empty() ? "" : ", ") + r.task + " " + r.split + " " + r.metric + " " + fmt(r.value);
  return s;
}

// ---------------------------------------------------------------------------
// Commands

std::string cmd_pretrain_atom(Context &ctx, const RunConfig &run) {
  require_file(ctx.opts.data, "--data");
  record_input(ctx, ctx.opts.data);
  const AtomDataset data = load_atom_dataset(ctx.opts.data, run.split_seed);
  const TrainResult result = pretrain_atom_level(data, run);
  for (const std::string &name: result.dropped_tasks)
    ctx.err << "molshift: note: dropped atom task '" << name << "' (constant train targets)\n";

  save_bundle(ctx.run_dir / "model", result.model, &result.optimizer);
  write_origin(ctx.run_dir / "model", ModelTag::kAtomPretrained);
  write_history(ctx.run_dir / "history.csv", result.history);
  const auto rows = atom_metric_rows(result.model, data, run.seed,
                                     { SplitRole::kValid, SplitRole::kTest });
  write_metrics_csv(ctx.run_dir / "metrics.csv", rows);
  return "best epoch " + std::to_string(result.best_epoch) + " of "
         + std::to_string(result.history.size()) + "; " + describe_metrics(rows);
}

std::string cmd_pretrain_mol(Context &ctx, const RunConfig &run) {
  require_file(ctx.opts.data, "--data");
  record_input(ctx, ctx.opts.data);
  const MolDataset data = load_mol_dataset(ctx.opts.data, run.split_seed);
  const TrainResult result = pretrain_mol_level(data, run);
  save_bundle(ctx.run_dir / "model", result.model, &result.optimizer);
  write_origin(ctx.run_dir / "model", ModelTag::kMolPretrained);
  write_history(ctx.run_dir / "history.csv", result.history);
  const auto rows = mol_metric_rows(result.model, data, run.seed,
                                    { SplitRole::kValid, SplitRole::kTest }, ctx.err);
  write_metrics_csv(ctx.run_dir / "metrics.csv", rows);
  return "best epoch " + std::to_string(result.best_epoch) + " of "
         + std::to_string(result.history.size()) + "; " + describe_metrics(rows);
}

std::string cmd_finetune(Context &ctx, const RunConfig &run) {
  require_file(ctx.opts.data, "--data");
  if (ctx.opts.task.empty())
    throw UsageError("--task is required");
  Metric metric;
  try {
    metric = metric_from_string(ctx.opts.metric);
  } catch (const DataError &e) {
    throw UsageError(std::string("--metric: ") + e.what());
  }
  const MolTask task { ctx.opts.task, is_binary_metric(metric) ? HeadKind::kBinary
                                                                : HeadKind::kRegression,
                       metric };
  record_input(ctx, ctx.opts.data);
  const MolDataset data = load_mol_dataset(ctx.opts.data, run.split_seed);

  std::optional<ModelBundle> init;
  ModelTag tag = ModelTag::kScratch;
  if (!ctx.opts.init_checkpoint.empty()) {
    require_file(ctx.opts.init_checkpoint, "--init-checkpoint");
    const fs::path dir = model_dir_of(ctx.opts.init_checkpoint);
    record_input(ctx, dir);
    init = load_bundle(ctx.opts.init_checkpoint);
    const bool atom_level = std::all_of(init->tasks.begin(), init->tasks.end(),
                                        [](const TaskInfo &t) { return t.atom_level; });
    tag = read_origin(dir).value_or(atom_level ? ModelTag::kAtomPretrained
                                               : ModelTag::kMolPretrained);
  }
  const TrainResult result = finetune(init ? &*init : nullptr, task, data, run);

  save_bundle(ctx.run_dir / "model", result.model, &result.optimizer);
  write_origin(ctx.run_dir / "model", tag);
  write_history(ctx.run_dir / "history.csv", result.history);
  auto rows = mol_metric_rows(result.model, data, run.seed,
                              { SplitRole::kValid, SplitRole::kTest }, ctx.err);
  if (result.epochs_to_target) {
    rows.push_back({ task.name, run.seed, "valid", "epochs_to_target",
                     static_cast<double>(*result.epochs_to_target) });
  }
  write_metrics_csv(ctx.run_dir / "metrics.csv", rows);
  return to_string(tag) + " init; best epoch " + std::to_string(result.best_epoch) + " of "
         + std::to_string(result.history.size()) + "; " + describe_metrics(rows);
}

std::string cmd_eval(Context &ctx) {
  require_file(ctx.opts.init_checkpoint, "--init-checkpoint");
  require_file(ctx.opts.data, "--data");
  const RunConfig run = resolve_run_config(ctx);
  record_input(ctx, model_dir_of(ctx.opts.init_checkpoint));
  record_input(ctx, ctx.opts.data);
  const ModelBundle bundle = load_bundle(ctx.opts.init_checkpoint);
  const auto splits = parse_splits(ctx.opts.splits, { SplitRole::kTest });
  const bool atom_model = bundle.tasks.front().atom_level;
  if (atom_model != is_atom_data(ctx.opts.data)) {
    throw DataError(std::string("a ") + (atom_model ? "per-atom" : "molecule-level")
                    + " model needs a " + (atom_model ? ".jsonl atom" : ".csv molecule")
                    + " dataset");
  }
  std::vector<MetricRow> rows;
  if (atom_model) {
    rows = atom_metric_rows(bundle, load_atom_dataset(ctx.opts.data, run.split_seed), run.seed,
                            splits);
  } else {
    rows = mol_metric_rows(bundle, load_mol_dataset(ctx.opts.data, run.split_seed), run.seed,
                           splits, ctx.err);
  }
  write_metrics_csv(ctx.run_dir / "metrics.csv", rows);
  return describe_metrics(rows);
}

std::string cmd_extract(Context &ctx) {
  require_file(ctx.opts.init_checkpoint, "--init-checkpoint");
  require_file(ctx.opts.data, "--data");
  const RunConfig run = resolve_run_config(ctx);
  const fs::path model_dir = model_dir_of(ctx.opts.init_checkpoint);
  record_input(ctx, model_dir);
  record_input(ctx, ctx.opts.data);
  const ModelBundle bundle = load_bundle(ctx.opts.init_checkpoint);
  if (ctx.opts.capture_layer < 1 || ctx.opts.capture_layer > bundle.config.num_layers) {
    throw UsageError("--capture-layer must lie in 1.." + std::to_string(bundle.config.num_layers));
  }
  ModelTag tag = ModelTag::kScratch;
  if (!ctx.opts.model_tag.empty()) {
    tag = model_tag_from_string(ctx.opts.model_tag);
  } else if (auto origin = read_origin(model_dir)) {
    tag = *origin;
  }

  std::map<SplitRole, std::vector<MolecularGraph>> graphs;
  if (is_atom_data(ctx.opts.data)) {
    const AtomDataset data = load_atom_dataset(ctx.opts.data, run.split_seed);
    for (SplitRole s: kAllSplits) {
      for (const AtomRecord &r: data[s])
        graphs[s].push_back(r.graph);
    }
  } else {
    const MolDataset data = load_mol_dataset(ctx.opts.data, run.split_seed);
    for (SplitRole s: kAllSplits) {
      for (const MolRecord &r: data[s])
        graphs[s].push_back(r.graph);
    }
  }

  nlohmann::json meta = { { "model_tag", to_string(tag) },
                          { "capture_layer", ctx.opts.capture_layer },
                          { "hidden_dim", bundle.config.hidden_dim },
                          { "splits", nlohmann::json::object() } };
  std::string summary;
  for (SplitRole s: parse_splits(ctx.opts.splits, { kAllSplits.begin(), kAllSplits.end() })) {
    const FeatureMatrix f =
        extract_features(bundle, graphs[s], s, tag, ctx.opts.capture_layer);
    const std::string file = to_string(s) + ".msfeat";
    write_feature_file(ctx.run_dir / file, f.values);
    meta["splits"][to_string(s)] = { { "file", file }, { "rows", f.rows() },
                                     { "molecules", graphs[s].size() } };
    summary += (summary.empty() ? "" : ", ") + to_string(s) + " " + std::to_string(f.rows())
               + "x" + std::to_string(f.dims());
  }
  std::ofstream(ctx.run_dir / "features.json") << meta.dump(2) << "\n";
  return to_string(tag) + " features " + summary;
}

struct FeatureSet {
  ModelTag model = ModelTag::kScratch;
  std::map<SplitRole, fs::path> files;
};

FeatureSet read_feature_set(Context &ctx, const std::string &dir, const char *flag) {
  require_file(dir, flag);
  const fs::path meta_path = fs::path(dir) / "features.json";
  if (!fs::exists(meta_path))
    throw DataError(dir + ": no features.json (expected an extract-features run directory)");
  record_input(ctx, dir);
  try {
    std::ifstream in(meta_path);
    const nlohmann::json meta = nlohmann::json::parse(in);
    FeatureSet set;
    set.model = model_tag_from_string(meta.at("model_tag").get<std::string>());
    for (const auto &[name, entry]: meta.at("splits").items())
      set.files[split_role_from_string(name)] = fs::path(dir) / entry.at("file").get<std::string>();
    return set;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(meta_path.string() + ": " + e.what());
  }
}

FeatureMatrix load_split(const FeatureSet &set, SplitRole split, const std::string &dir) {
  auto it = set.files.find(split);
  if (it == set.files.end())
    throw DataError(dir + ": no features for split " + to_string(split));
  FeatureMatrix f;
  f.values = read_feature_file(it->second);
  f.split = split;
  f.model = set.model;
  return f;
}

void require_bins(int bins) {
  if (bins < 1)
    throw UsageError("--bins must be positive");
}

std::string cmd_analyze_shift(Context &ctx) {
  require_bins(ctx.opts.bins);
  const auto splits = parse_splits(ctx.opts.splits, { SplitRole::kTrain, SplitRole::kTest });
  if (splits.size() != 2)
    throw UsageError("--splits must name exactly two splits, e.g. train,test");
  const FeatureSet a = read_feature_set(ctx, ctx.opts.features_a, "--features-a");
  const FeatureSet b = read_feature_set(ctx, ctx.opts.features_b, "--features-b");
  const DifferencedShift report = shift_report(
      load_split(a, splits[0], ctx.opts.features_a), load_split(a, splits[1], ctx.opts.features_a),
      load_split(b, splits[0], ctx.opts.features_b), load_split(b, splits[1], ctx.opts.features_b),
      ctx.opts.bins);
  write_shift_csv(ctx.run_dir / "shift.csv", { report.a, report.b });
  write_delta_csv(ctx.run_dir / "shift_delta.csv", report);

  std::string summary = to_string(a.model) + " minus " + to_string(b.model) + " on "
                        + report.a.split_pair() + ", mean delta:";
  for (ShiftMetric m: kShiftMetrics) {
    double sum = 0.0;
    for (const Divergences &d: report.delta)
      sum += d[m];
    summary += " " + to_string(m) + " " + fmt(sum / static_cast<double>(report.delta.size()));
  }
  return summary;
}

std::string cmd_report(Context &ctx) {
  require_bins(ctx.opts.bins);
  if (ctx.opts.features.empty())
    throw UsageError("--features is required (repeat it for several models)");
  std::vector<NormalityReport> reports;
  std::ofstream summary_csv(ctx.run_dir / "normality_summary.csv");
  summary_csv << "model,split,dimensions,mean_p,std_p\n";
  std::string summary;
  for (const std::string &dir: ctx.opts.features) {
    const FeatureSet set = read_feature_set(ctx, dir, "--features");
    std::vector<FeatureMatrix> splits;
    for (const auto &[split, file]: set.files)
      splits.push_back(load_split(set, split, dir));
    for (const FeatureMatrix &f: splits) {
      NormalityReport r = normality_report(f, ctx.manifest.seed);
      std::size_t tested = 0;
      for (const auto &d: r.dims)
        tested += d.shapiro.has_value();
      if (tested > 0) {
        const auto [mean, std] = normality_summary(r);
        summary_csv << to_string(f.model) << "," << to_string(f.split) << "," << tested << ","
                    << fmt(mean) << "," << fmt(std) << "\n";
        summary += (summary.empty() ? "" : ", ") + to_string(f.model) + "/" + to_string(f.split)
                   + " mean SW p " + fmt(mean);
      }
      reports.push_back(std::move(r));
    }
    write_histogram_csv(ctx.run_dir / ("histograms_" + to_string(set.model) + ".csv"), splits,
                        ctx.opts.bins);
  }
  write_normality_csv(ctx.run_dir / "normality.csv", reports);
  return summary;
}

// Canonical, --out-free argument list with absolute paths.
std::vector<std::string> canonical_args(const Options &o) {
  std::vector<std::string> a = { o.command };
  auto add = [&](const char *flag, const std::string &value, bool path) {
    if (!value.empty()) {
      a.push_back(flag);
      a.push_back(path ? absolute(value) : value);
    }
  };
  add("--config", o.config, true);
  if (o.seed)
    add("--seed", std::to_string(*o.seed), false);
  add("--data", o.data, true);
  add("--init-checkpoint", o.init_checkpoint, true);
  add("--task", o.task, false);
  if (o.command == "finetune")
    add("--metric", o.metric, false);
  add("--splits", o.splits, false);
  if (o.command == "analyze-shift" || o.command == "report")
    add("--bins", std::to_string(o.bins), false);
  if (o.command == "extract-features")
    add("--capture-layer", std::to_string(o.capture_layer), false);
  for (const std::string &s: o.set)
    add("--set", s, false);
  add("--features-a", o.features_a, true);
  add("--features-b", o.features_b, true);
  for (const std::string &f: o.features)
    add("--features", f, true);
  add("--model-tag", o.model_tag, false);
  return a;
}

std::uint64_t run_seed(Context &ctx, std::optional<RunConfig> &run) {
  const std::string &c = ctx.opts.command;
  if (c == "pretrain-atom" || c == "pretrain-mol" || c == "finetune") {
    run = resolve_run_config(ctx);
    return run->seed;
  }
  return ctx.opts.seed.value_or(0);
}

std::string cmd_rerun(const Options &opts, std::ostream &err, CliResult &result) {
  require_file(opts.manifest, "--manifest");
  const fs::path manifest_path = fs::is_directory(opts.manifest)
                                     ? fs::path(opts.manifest) / "manifest.json"
                                     : fs::path(opts.manifest);
  const Manifest m = read_manifest(manifest_path);
  for (const auto &[path, hash]: m.inputs) {
    if (!fs::exists(path))
      throw DataError("manifest input is missing: " + path);
    if (sha256_file(path) != hash)
      throw DataError("manifest input changed since the recorded run: " + path);
  }

  std::vector<std::string> args = m.args;
  args.push_back("--out");
  args.push_back(opts.out.empty() || opts.out == "runs"
                     ? fs::absolute(manifest_path).parent_path().parent_path().string()
                     : opts.out);
  std::ostringstream inner_out;
  result = run_cli(args, inner_out, err);
  if (result.exit_code != kExitOk)
    return "";

  const Manifest again = read_manifest(result.run_dir / "manifest.json");
  std::vector<std::string> differ;
  for (const auto &[file, hash]: m.outputs) {
    auto it = again.outputs.find(file);
    if (it == again.outputs.end() || it->second != hash)
      differ.push_back(file);
  }
  for (const auto &[file, hash]: again.outputs) {
    if (m.outputs.count(file) == 0)
      differ.push_back(file);
  }
  if (!differ.empty()) {
    std::string list;
    for (const std::string &f: differ)
      list += " " + f;
    err << "molshift: error: rerun outputs differ from the manifest:" << list << "\n";
    result.exit_code = kExitNumeric;
    return "";
  }
  return "reproduced " + std::to_string(m.outputs.size()) + " outputs bit-exactly";
}

CliResult execute(const Options &opts, std::ostream &out, std::ostream &err) {
  CliResult result;
  if (opts.command == "rerun") {
    const std::string summary = cmd_rerun(opts, err, result);
    if (result.exit_code == kExitOk)
      out << "rerun: " << summary << " -> " << result.run_dir.string() << "\n";
    return result;
  }

  Context ctx { opts, out, err, {}, {} };
  ctx.manifest.command = opts.command;
  ctx.manifest.args = canonical_args(opts);
  ctx.manifest.version = kVersion;
  std::optional<RunConfig> run;
  ctx.manifest.seed = run_seed(ctx, run);
  ctx.run_dir = make_run_dir(opts.out, opts.command, ctx.manifest.seed);
  result.run_dir = ctx.run_dir;

  // A run directory always holds a manifest, so a failed run leaves none.
  const std::string &c = opts.command;
  std::string summary;
  try {
    if (c == "pretrain-atom")
      summary = cmd_pretrain_atom(ctx, *run);
    else if (c == "pretrain-mol")
      summary = cmd_pretrain_mol(ctx, *run);
    else if (c == "finetune")
      summary = cmd_finetune(ctx, *run);
    else if (c == "eval")
      summary = cmd_eval(ctx);
    else if (c == "extract-features")
      summary = cmd_extract(ctx);
    else if (c == "analyze-shift")
      summary = cmd_analyze_shift(ctx);
    else if (c == "report")
      summary = cmd_report(ctx);
    else
      throw UsageError("unknown command '" + c + "'");
  } catch (...) {
    std::error_code ec;
    fs::remove_all(ctx.run_dir, ec);
    throw;
  }

  ctx.manifest.outputs = hash_outputs(ctx.run_dir);
  write_manifest(ctx.run_dir, ctx.manifest);
  out << c << ": " << summary << " -> " << ctx.run_dir.string() << "\n";
  return result;
}

void add_common(CLI::App *sub, Options &o) {
  sub->add_option("--out", o.out, "Parent directory for run directories")->capture_default_str();
  sub->add_option("--seed", o.seed, "Random seed (overrides the config file)");
}

void add_training(CLI::App *sub, Options &o) {
  sub->add_option("--config", o.config, "Run configuration file (key = value)");
  sub->add_option("--set", o.set, "Override one config key, as key=value (repeatable)");
  sub->add_option("--data", o.data, "Dataset file: .jsonl per-atom records or .csv molecules");
}

}  // namespace

CliResult run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  Options opts;
  CLI::App app { "molshift: graph transformer pretraining and feature-shift analysis", "molshift" };
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto *pa = app.add_subcommand("pretrain-atom", "Multitask pretraining on per-atom targets");
  add_common(pa, opts);
  add_training(pa, opts);

  auto *pm = app.add_subcommand("pretrain-mol", "Pretraining on one molecule-level target");
  add_common(pm, opts);
  add_training(pm, opts);

  auto *ft = app.add_subcommand("finetune", "Train on a downstream molecule task");
  add_common(ft, opts);
  add_training(ft, opts);
  ft->add_option("--init-checkpoint", opts.init_checkpoint,
                 "Pretrained model directory or model.ckpt (omit to train from scratch)");
  ft->add_option("--task", opts.task, "Task name");
  ft->add_option("--metric", opts.metric, "MAE, Spearman, ROC-AUC or PR-AUC")->capture_default_str();

  auto *ev = app.add_subcommand("eval", "Score a trained model on dataset splits");
  add_common(ev, opts);
  add_training(ev, opts);
  ev->add_option("--init-checkpoint", opts.init_checkpoint, "Model directory or model.ckpt");
  ev->add_option("--splits", opts.splits, "Comma-separated splits (default test)");

  auto *ex = app.add_subcommand("extract-features", "Dump captured node states per split");
  add_common(ex, opts);
  add_training(ex, opts);
  ex->add_option("--init-checkpoint", opts.init_checkpoint, "Model directory or model.ckpt");
  ex->add_option("--splits", opts.splits, "Comma-separated splits (default all)");
  ex->add_option("--capture-layer", opts.capture_layer, "Layer whose output is captured")
      ->capture_default_str();
  ex->add_option("--model-tag", opts.model_tag,
                 "scratch, mol_pretrained or atom_pretrained (default: from the model)");

  auto *as = app.add_subcommand("analyze-shift", "Differenced split-shift divergences of two models");
  add_common(as, opts);
  as->add_option("--features-a", opts.features_a, "extract-features run of model A");
  as->add_option("--features-b", opts.features_b, "extract-features run of model B");
  as->add_option("--splits", opts.splits, "Two splits, e.g. train,test (default)");
  as->add_option("--bins", opts.bins, "Histogram bins per dimension")->capture_default_str();

  auto *rp = app.add_subcommand("report", "Normality tests and histogram dumps of features");
  add_common(rp, opts);
  rp->add_option("--features", opts.features, "extract-features run (repeatable)");
  rp->add_option("--bins", opts.bins, "Histogram bins per dimension")->capture_default_str();

  auto *rr = app.add_subcommand("rerun", "Repeat a run from its manifest and compare outputs");
  rr->add_option("--manifest", opts.manifest, "manifest.json or its run directory");
  rr->add_option("--out", opts.out, "Parent directory for the new run (default: next to the original)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return { kExitOk, {} };
  } catch (const CLI::CallForVersion &) {
    out << kVersion << "\n";
    return { kExitOk, {} };
  } catch (const CLI::ParseError &e) {
    err << "molshift: usage error: " << e.what() << "\n";
    return { kExitUsage, {} };
  }
  opts.command = app.get_subcommands().front()->get_name();

  CliResult result;
  try {
    return execute(opts, out, err);
  } catch (const UsageError &e) {
    err << "molshift: usage error: " << e.what() << "\n";
    result.exit_code = kExitUsage;
  } catch (const NumericError &e) {
    err << "molshift: numeric failure: " << e.what() << "\n";
    result.exit_code = kExitNumeric;
  } catch (const std::exception &e) {
    err << "molshift: data error: " << e.what() << "\n";
    result.exit_code = kExitData;
  }
  return result;
}

}  // namespace molshift::cli
