//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/trainpipe/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "molshift/errors.hpp"
#include "molshift/graphormer/graphormer.hpp"
#include "molshift/molgraph/encode.hpp"
#include "molshift/tensor/ops.hpp"
#include "molshift/trainpipe/parallel.hpp"

namespace molshift {

using tensor::Matrix;
using tensor::ParamStore;
using tensor::Tape;
using tensor::Var;

// ---------------------------------------------------------------------------
// Task metadata and bundles

nlohmann::json to_json(const TaskInfo &task) {
  nlohmann::json j = {
    { "name", task.name },
    { "kind", to_string(task.kind) },
    { "atom_level", task.atom_level },
    { "mean", task.mean },
    { "std", task.std },
  };
  if (task.metric)
    j["metric"] = to_string(*task.metric);
  return j;
}

TaskInfo task_info_from_json(const nlohmann::json &j) {
  try {
    TaskInfo t;
    t.name = j.at("name").get<std::string>();
    t.kind = head_kind_from_string(j.at("kind").get<std::string>());
    t.atom_level = j.at("atom_level").get<bool>();
    t.mean = j.at("mean").get<double>();
    t.std = j.at("std").get<double>();
    if (j.contains("metric"))
      t.metric = metric_from_string(j.at("metric").get<std::string>());
    if (!(t.std > 0))
      throw DataError("task '" + t.name + "' has non-positive std");
    return t;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("malformed task description: ") + e.what());
  } catch (const std::invalid_argument &e) {
    throw DataError(e.what());
  }
}

TaskInfo fit_atom_task(const std::string &name, const std::vector<AtomRecord> &train) {
  if (std::find(kAtomTaskNames.begin(), kAtomTaskNames.end(), name) == kAtomTaskNames.end())
    throw DataError("unknown atom task '" + name + "'");
  double sum = 0.0;
  std::size_t count = 0;
  for (const AtomRecord &r: train) {
    if (auto it = r.props.find(name); it != r.props.end()) {
      for (double v: it->second)
        sum += v;
      count += it->second.size();
    }
  }
  if (count == 0)
    throw DataError("atom task '" + name + "' has no train data");
  const double mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (const AtomRecord &r: train) {
    if (auto it = r.props.find(name); it != r.props.end()) {
      for (double v: it->second)
        sq += (v - mean) * (v - mean);
    }
  }
  const double std = std::sqrt(sq / static_cast<double>(count));
  if (!(std > 0))
    throw DataError("atom task '" + name + "' has constant train targets");
  TaskInfo t;
  t.name = name;
  t.atom_level = true;
  t.mean = mean;
  t.std = std;
  return t;
}

void MolTask::validate() const {
  const bool binary = kind == HeadKind::kBinary;
  if (binary != is_binary_metric(metric)) {
    throw DataError("metric " + to_string(metric) + " does not suit a "
                    + to_string(kind) + " task");
  }
}

void save_bundle(const std::filesystem::path &dir, const ModelBundle &bundle,
                 const tensor::AdamState<Real> *optimizer) {
  if (static_cast<int>(bundle.tasks.size()) != bundle.config.num_tasks)
    throw std::invalid_argument("bundle task list does not match the model config");
  save_model(dir, bundle.config, bundle.params, optimizer);
  nlohmann::json tasks = nlohmann::json::array();
  for (const TaskInfo &t: bundle.tasks)
    tasks.push_back(to_json(t));
  std::ofstream os(dir / "tasks.json");
  if (!os)
    throw DataError("cannot write " + (dir / "tasks.json").string());
  os << tasks.dump(2) << '\n';
}

ModelBundle load_bundle(const std::filesystem::path &dir_or_checkpoint) {
  const std::filesystem::path dir = std::filesystem::is_directory(dir_or_checkpoint)
                                        ? dir_or_checkpoint
                                        : dir_or_checkpoint.parent_path();
  SavedModel<Real> saved = load_model<Real>(dir_or_checkpoint);
  ModelBundle bundle;
  bundle.config = saved.config;
  bundle.params = std::move(saved.params);

  std::ifstream in(dir / "tasks.json");
  if (!in)
    throw DataError("cannot open " + (dir / "tasks.json").string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error &e) {
    throw DataError((dir / "tasks.json").string() + ": " + e.what());
  }
  if (!j.is_array())
    throw DataError((dir / "tasks.json").string() + ": expected a JSON array");
  for (const auto &item: j)
    bundle.tasks.push_back(task_info_from_json(item));
  if (static_cast<int>(bundle.tasks.size()) != bundle.config.num_tasks)
    throw DataError("tasks.json lists " + std::to_string(bundle.tasks.size())
                    + " tasks, model has " + std::to_string(bundle.config.num_tasks));
  for (std::size_t i = 0; i < bundle.tasks.size(); ++i) {
    if (bundle.tasks[i].kind != bundle.config.head_kinds[i])
      throw DataError("tasks.json kind of '" + bundle.tasks[i].name + "' disagrees with config");
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

// One supervised example: a graph carrying one task node and its target in
// training units (z-scores or 0/1 labels).
struct Example {
  EncodedGraph enc;
  Matrix<Real> target;
  int task = 0;
  bool atom_level = false;
  bool binary = false;
  const std::string *smiles = nullptr;
};

struct ValidScore {
  double loss = 0.0;
  double metric = 0.0;
  std::vector<double> task_losses;
};

struct Selection {
  bool by_metric = false;
  bool higher_is_better = false;
  bool metric_is_mae = true;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL);
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

Var<Real> example_loss(Tape<Real> &tape, const ParamStore<Real> &params,
                       const ModelConfig &config, const Example &ex,
                       const ForwardOptions<Real> &options) {
  if (ex.atom_level)
    return tensor::mse_loss(predict_atom_level(tape, params, config, ex.enc, options), ex.target);
  Var<Real> pred = predict_graph_level(tape, params, config, ex.enc, options);
  return ex.binary ? tensor::bce_with_logits_loss(pred, ex.target)
                   : tensor::mse_loss(pred, ex.target);
}

std::string describe(const Example &ex, const std::vector<TaskInfo> &tasks) {
  return "'" + (ex.smiles ? *ex.smiles : std::string("?")) + "' (task "
         + tasks[static_cast<std::size_t>(ex.task)].name + ")";
}

bool improves(const ValidScore &candidate, double best, const Selection &sel) {
  const double value = sel.by_metric ? candidate.metric : candidate.loss;
  if (!std::isfinite(value))
    return false;
  return sel.by_metric && sel.higher_is_better ? value > best : value < best;
}

TrainResult train_loop(ModelBundle model, const std::vector<Example> &train,
                       const std::function<ValidScore(const ParamStore<Real> &)> &score,
                       const RunConfig &run, const Selection &sel) {
  if (train.empty())
    throw DataError("training split is empty");

  TrainResult result;
  tensor::AdamState<Real> adam(model.params, run.learning_rate);
  std::mt19937_64 shuffle_rng(mix_seed(run.seed, 0x5348, 0));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  const std::size_t batch_cap = static_cast<std::size_t>(run.batch_size);
  std::vector<tensor::Gradients<Real>> item_grads(std::min(batch_cap, train.size()),
                                                  tensor::Gradients<Real>(model.params));
  std::vector<double> item_loss(item_grads.size());
  tensor::Gradients<Real> total(model.params);

  double best = sel.by_metric && sel.higher_is_better ? -INFINITY : INFINITY;
  ParamStore<Real> best_params = model.params;
  int since_best = 0;

  for (int epoch = 1; epoch <= run.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;

    for (std::size_t start = 0; start < order.size(); start += batch_cap) {
      const std::size_t count = std::min(batch_cap, order.size() - start);

      // Weights give every task in the batch equal say.
      std::map<int, int> per_task;
      for (std::size_t k = 0; k < count; ++k)
        ++per_task[train[order[start + k]].task];

      parallel_for(count, [&](std::size_t k) {
        const std::size_t pos = start + k;
        const Example &ex = train[order[pos]];
        std::mt19937_64 dropout_rng(mix_seed(run.seed, static_cast<std::uint64_t>(epoch), pos));
        ForwardOptions<Real> options;
        options.dropout_rng = &dropout_rng;
        Tape<Real> tape;
        Var<Real> loss = example_loss(tape, model.params, model.config, ex, options);
        item_loss[k] = loss.value()(0, 0);
        if (!std::isfinite(item_loss[k]))
          return;
        item_grads[k].set_zero();
        tape.backward(loss);
        tape.accumulate_gradients(item_grads[k]);
      });

      total.set_zero();
      double batch_loss = 0.0;
      for (std::size_t k = 0; k < count; ++k) {
        const Example &ex = train[order[start + k]];
        if (!std::isfinite(item_loss[k])) {
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " for "
                             + describe(ex, model.tasks));
        }
        const double w = 1.0 / (static_cast<double>(per_task.size()) * per_task[ex.task]);
        batch_loss += w * item_loss[k];
        for (std::size_t p = 0; p < total.size(); ++p)
          total[p] += static_cast<Real>(w) * item_grads[k][p];
      }
      epoch_loss += batch_loss * static_cast<double>(count);
      try {
        tensor::adam_step(model.params, total, adam);
      } catch (const NumericError &e) {
        throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
      }
    }

    const ValidScore valid = score(model.params);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(train.size());
    rec.valid_loss = valid.loss;
    rec.valid_metric = valid.metric;
    rec.valid_task_losses = valid.task_losses;
    result.history.push_back(rec);
    if (!std::isfinite(valid.loss))
      throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));

    if (improves(valid, best, sel) || epoch == 1) {
      best = sel.by_metric ? valid.metric : valid.loss;
      best_params = model.params;
      result.best_epoch = epoch;
      result.best_valid_loss = valid.loss;
      result.best_valid_metric = valid.metric;
      result.optimizer = adam;
      since_best = 0;
    } else {
      ++since_best;
    }

    if (run.target_mae && sel.metric_is_mae && !result.epochs_to_target
        && valid.metric <= *run.target_mae) {
      result.epochs_to_target = epoch;
      if (run.stop_at_target)
        break;
    }
    if (run.patience > 0 && since_best >= run.patience)
      break;
  }

  model.params = std::move(best_params);
  result.model = std::move(model);
  return result;
}

Matrix<Real> column(const std::vector<double> &values, const TaskInfo &task) {
  Matrix<Real> m(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i)
    m(static_cast<Eigen::Index>(i), 0) = static_cast<Real>(task.normalize(values[i]));
  return m;
}

std::vector<Example> atom_examples(const std::vector<AtomRecord> &records,
                                   const std::vector<TaskInfo> &tasks, int d_max) {
  const AtomVocab vocab = AtomVocab::organic();
  std::vector<Example> out;
  for (const AtomRecord &r: records) {
    const EncodedGraph base = encode(r.graph, vocab, d_max);
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      auto it = r.props.find(tasks[t].name);
      if (it == r.props.end())
        continue;
      Example ex;
      ex.enc = with_task(base, static_cast<int>(t));
      ex.target = column(it->second, tasks[t]);
      ex.task = static_cast<int>(t);
      ex.atom_level = true;
      ex.smiles = &r.smiles;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

std::vector<Example> mol_examples(const std::vector<MolRecord> &records, const TaskInfo &task,
                                  int d_max) {
  const AtomVocab vocab = AtomVocab::organic();
  std::vector<Example> out;
  for (const MolRecord &r: records) {
    Example ex;
    ex.enc = encode(r.graph, vocab, d_max, 0);
    ex.target = Matrix<Real>::Constant(1, 1, static_cast<Real>(task.normalize(r.target)));
    ex.binary = task.kind == HeadKind::kBinary;
    ex.smiles = &r.smiles;
    out.push_back(std::move(ex));
  }
  return out;
}

// Scalar prediction in training units for every example, computed in parallel.
std::vector<Matrix<Real>> raw_predictions(const ParamStore<Real> &params,
                                          const ModelConfig &config,
                                          const std::vector<Example> &examples) {
  std::vector<Matrix<Real>> out(examples.size());
  parallel_for(examples.size(), [&](std::size_t i) {
    const Example &ex = examples[i];
    if (ex.atom_level) {
      out[i] = infer_atom_level(params, config, ex.enc);
    } else {
      out[i] = Matrix<Real>::Constant(1, 1, infer_graph_level(params, config, ex.enc));
    }
  });
  return out;
}

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double bce(double logit, double y) {
  return std::max(logit, 0.0) - logit * y + std::log1p(std::exp(-std::abs(logit)));
}

TaskInfo mol_task_info(const std::string &name, HeadKind kind, std::optional<Metric> metric,
                       const std::vector<MolRecord> &train) {
  TaskInfo t;
  t.name = name;
  t.kind = kind;
  t.metric = metric;
  if (kind == HeadKind::kRegression && !train.empty()) {
    double mean = 0.0;
    for (const MolRecord &r: train)
      mean += r.target;
    mean /= static_cast<double>(train.size());
    double sq = 0.0;
    for (const MolRecord &r: train)
      sq += (r.target - mean) * (r.target - mean);
    const double std = std::sqrt(sq / static_cast<double>(train.size()));
    t.mean = mean;
    // A constant target keeps unit scale; the model then learns the constant.
    t.std = std > 0 ? std : 1.0;
  }
  return t;
}

std::function<ValidScore(const ParamStore<Real> &)>
mol_scorer(const ModelConfig &config, const std::vector<MolRecord> &valid,
           const std::vector<Example> &examples, const TaskInfo &task, Metric metric) {
  return [config, &valid, &examples, task, metric](const ParamStore<Real> &params) {
    const std::vector<Matrix<Real>> raw = raw_predictions(params, config, examples);
    ValidScore s;
    std::vector<double> preds, labels;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const double z = raw[i](0, 0);
      const double y = valid[i].target;
      if (task.kind == HeadKind::kBinary) {
        s.loss += bce(z, y);
        preds.push_back(sigmoid(z));
      } else {
        const double d = z - task.normalize(y);
        s.loss += d * d;
        preds.push_back(task.denormalize(z));
      }
      labels.push_back(y);
    }
    s.loss /= static_cast<double>(raw.size());
    s.metric = compute_metric(metric, preds, labels);
    s.task_losses = { s.loss };
    return s;
  };
}

void require_valid(std::size_t n) {
  if (n == 0)
    throw DataError("validation split is empty");
}

}  // namespace

TrainResult pretrain_atom_level(const AtomDataset &data, const RunConfig &run) {
  run.validate();
  std::vector<std::string> names = run.tasks;
  if (names.empty()) {
    for (const std::string &name: kAtomTaskNames) {
      for (const AtomRecord &r: data.train) {
        if (r.props.count(name) > 0) {
          names.push_back(name);
          break;
        }
      }
    }
  }
  if (names.empty())
    throw DataError("no atom tasks with train data");

  std::vector<TaskInfo> tasks;
  std::vector<std::string> dropped;
  for (const std::string &name: names) {
    if (std::find(kAtomTaskNames.begin(), kAtomTaskNames.end(), name) == kAtomTaskNames.end())
      throw DataError("unknown atom task '" + name + "'");
    try {
      tasks.push_back(fit_atom_task(name, data.train));
    } catch (const DataError &) {
      // Constant or missing train targets carry no signal; skip the task.
      dropped.push_back(name);
    }
  }
  if (tasks.empty())
    throw DataError("every requested atom task has constant or missing train targets");

  ModelBundle model;
  model.config = run.model(std::vector<HeadKind>(tasks.size(), HeadKind::kRegression));
  model.params = init_params<Real>(model.config, run.seed);
  model.tasks = tasks;

  const std::vector<Example> train = atom_examples(data.train, tasks, model.config.d_max);
  const std::vector<Example> valid = atom_examples(data.valid, tasks, model.config.d_max);
  require_valid(valid.size());

  auto score = [&, config = model.config](const ParamStore<Real> &params) {
    const std::vector<Matrix<Real>> raw = raw_predictions(params, config, valid);
    std::vector<double> sq(tasks.size(), 0.0), abs_err(tasks.size(), 0.0);
    std::vector<std::size_t> items(tasks.size(), 0), atoms(tasks.size(), 0);
    for (std::size_t i = 0; i < valid.size(); ++i) {
      const Example &ex = valid[i];
      const TaskInfo &task = tasks[static_cast<std::size_t>(ex.task)];
      const auto diff = (raw[i] - ex.target).cast<double>();
      sq[ex.task] += diff.squaredNorm() / static_cast<double>(diff.size());
      abs_err[ex.task] += diff.cwiseAbs().sum() * task.std;
      ++items[ex.task];
      atoms[ex.task] += static_cast<std::size_t>(diff.size());
    }
    ValidScore s;
    int present = 0;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const double task_loss = items[t] ? sq[t] / static_cast<double>(items[t]) : 0.0;
      s.task_losses.push_back(task_loss);
      if (items[t] == 0)
        continue;
      ++present;
      s.loss += task_loss;
      s.metric += abs_err[t] / static_cast<double>(atoms[t]);
    }
    s.loss /= present;
    s.metric /= present;
    return s;
  };

  TrainResult result = train_loop(std::move(model), train, score, run, Selection {});
  result.dropped_tasks = std::move(dropped);
  return result;
}

TrainResult pretrain_mol_level(const MolDataset &data, const RunConfig &run) {
  run.validate();
  require_valid(data.valid.size());
  ModelBundle model;
  model.config = run.model({ HeadKind::kRegression });
  model.params = init_params<Real>(model.config, run.seed);
  model.tasks = { mol_task_info("mol_target", HeadKind::kRegression, Metric::kMae, data.train) };

  const std::vector<Example> train = mol_examples(data.train, model.tasks[0], run.d_max);
  const std::vector<Example> valid = mol_examples(data.valid, model.tasks[0], run.d_max);
  auto score = mol_scorer(model.config, data.valid, valid, model.tasks[0], Metric::kMae);
  return train_loop(std::move(model), train, score, run, Selection {});
}

TrainResult finetune(const ModelBundle *init, const MolTask &task, const MolDataset &data,
                     const RunConfig &run) {
  run.validate();
  task.validate();
  require_valid(data.valid.size());
  if (data.train.empty())
    throw DataError("training split is empty");
  if (task.kind == HeadKind::kBinary) {
    std::set<double> classes;
    for (const MolRecord &r: data.train) {
      if (r.target != 0.0 && r.target != 1.0)
        throw DataError("binary task '" + task.name + "' has a label other than 0 or 1");
      classes.insert(r.target);
    }
    if (classes.size() < 2)
      throw DataError("degenerate labels: task '" + task.name + "' has a single class");
  }

  ModelBundle model;
  model.tasks = { mol_task_info(task.name, task.kind, task.metric, data.train) };
  if (init != nullptr) {
    const ModelConfig &src = init->config;
    const bool mismatch = (run.hidden_dim && *run.hidden_dim != src.hidden_dim)
                          || (run.num_layers && *run.num_layers != src.num_layers)
                          || (run.num_heads && *run.num_heads != src.num_heads)
                          || run.d_max != src.d_max;
    if (mismatch)
      throw DataError("run config does not match the checkpoint's encoder config");
    ModelConfig target = src;
    target.num_tasks = 1;
    target.head_kinds = { task.kind };
    if (run.dropout)
      target.dropout_rate = *run.dropout;
    model.config = target;
    model.params = transfer_params(init->params, src, target, mix_seed(run.seed, 0x7461, 1));
  } else {
    model.config = run.model({ task.kind });
    model.params = init_params<Real>(model.config, run.seed);
  }

  const std::vector<Example> train = mol_examples(data.train, model.tasks[0], run.d_max);
  const std::vector<Example> valid = mol_examples(data.valid, model.tasks[0], run.d_max);
  auto score = mol_scorer(model.config, data.valid, valid, model.tasks[0], task.metric);
  Selection sel;
  sel.by_metric = true;
  sel.higher_is_better = higher_is_better(task.metric);
  sel.metric_is_mae = task.metric == Metric::kMae;
  return train_loop(std::move(model), train, score, run, sel);
}

std::vector<double> predict_molecules(const ModelBundle &bundle,
                                      const std::vector<MolRecord> &records, int task) {
  if (task < 0 || task >= static_cast<int>(bundle.tasks.size()))
    throw std::out_of_range("task index " + std::to_string(task) + " out of range");
  const TaskInfo &info = bundle.tasks[static_cast<std::size_t>(task)];
  const AtomVocab vocab = AtomVocab::organic();
  std::vector<double> out(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    const EncodedGraph enc = encode(records[i].graph, vocab, bundle.config.d_max, task);
    const double z = infer_graph_level(bundle.params, bundle.config, enc);
    out[i] = info.kind == HeadKind::kBinary ? sigmoid(z) : info.denormalize(z);
  });
  return out;
}

std::vector<std::vector<double>> predict_atoms(const ModelBundle &bundle,
                                               const std::vector<AtomRecord> &records,
                                               int task) {
  if (task < 0 || task >= static_cast<int>(bundle.tasks.size()))
    throw std::out_of_range("task index " + std::to_string(task) + " out of range");
  const TaskInfo &info = bundle.tasks[static_cast<std::size_t>(task)];
  const AtomVocab vocab = AtomVocab::organic();
  std::vector<std::vector<double>> out(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    const EncodedGraph enc = encode(records[i].graph, vocab, bundle.config.d_max, task);
    const Matrix<Real> z = infer_atom_level(bundle.params, bundle.config, enc);
    for (Eigen::Index k = 0; k < z.rows(); ++k)
      out[i].push_back(info.denormalize(z(k, 0)));
  });
  return out;
}

double evaluate_molecules(const ModelBundle &bundle, const std::vector<MolRecord> &records,
                          int task) {
  const TaskInfo &info = bundle.tasks.at(static_cast<std::size_t>(task));
  const Metric metric = info.metric.value_or(Metric::kMae);
  std::vector<double> labels;
  for (const MolRecord &r: records)
    labels.push_back(r.target);
  return compute_metric(metric, predict_molecules(bundle, records, task), labels);
}

}  // namespace molshift
