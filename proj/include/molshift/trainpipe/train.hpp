//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_TRAINPIPE_TRAIN_HPP_
#define MOLSHIFT_TRAINPIPE_TRAIN_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "molshift/graphormer/config.hpp"
#include "molshift/tensor/optim.hpp"
#include "molshift/tensor/tape.hpp"
#include "molshift/trainpipe/dataset.hpp"
#include "molshift/trainpipe/metrics.hpp"
#include "molshift/trainpipe/run_config.hpp"

namespace molshift {

// Scalar type of trained models and checkpoints.
using Real = float;

// One prediction target of a model, tied to the task embedding row of the
// same index. Regression targets are trained in z-scored units.
struct TaskInfo {
  std::string name;
  HeadKind kind = HeadKind::kRegression;
  bool atom_level = false;
  std::optional<Metric> metric;
  double mean = 0.0;
  double std = 1.0;

  double normalize(double y) const {
    return kind == HeadKind::kBinary ? y : (y - mean) / std;
  }
  double denormalize(double z) const {
    return kind == HeadKind::kBinary ? z : z * std + mean;
  }
};

nlohmann::json to_json(const TaskInfo &task);
TaskInfo task_info_from_json(const nlohmann::json &j);

// Per-atom task with train-split normalization. Throws DataError when the
// task has no train data or its train targets are constant.
TaskInfo fit_atom_task(const std::string &name, const std::vector<AtomRecord> &train);

// A downstream molecule-level task; the metric must suit the kind.
struct MolTask {
  std::string name;
  HeadKind kind = HeadKind::kRegression;
  Metric metric = Metric::kMae;

  void validate() const;
};

// A trained model: weights plus what its task rows mean.
struct ModelBundle {
  ModelConfig config;
  tensor::ParamStore<Real> params;
  std::vector<TaskInfo> tasks;
};

// Writes config.json, model.ckpt and tasks.json into `dir`.
void save_bundle(const std::filesystem::path &dir, const ModelBundle &bundle,
                 const tensor::AdamState<Real> *optimizer = nullptr);
ModelBundle load_bundle(const std::filesystem::path &dir_or_checkpoint);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double valid_metric = 0.0;
  std::vector<double> valid_task_losses;
};

struct TrainResult {
  // Parameters from the epoch with the best validation score.
  ModelBundle model;
  tensor::AdamState<Real> optimizer;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_valid_loss = 0.0;
  double best_valid_metric = 0.0;
  // First epoch whose validation MAE reached RunConfig::target_mae.
  std::optional<int> epochs_to_target;
  // Requested atom tasks skipped because their train targets are constant.
  std::vector<std::string> dropped_tasks;
};

/// Multitask pretraining on per-atom targets. Every (molecule, task) pair is
/// one example carrying that task's virtual node. The batch loss is the
/// unweighted mean over tasks of each task's mean z-scored MSE. The best
/// epoch is chosen by validation loss.
TrainResult pretrain_atom_level(const AtomDataset &data, const RunConfig &run);

// Graph-level regression of the molecule target through one task node.
TrainResult pretrain_mol_level(const MolDataset &data, const RunConfig &run);

/// Trains every weight on a downstream task. With `init`, the encoder and
/// head come from the pretrained bundle and a fresh task row is created;
/// without it the model starts from scratch. Early stopping follows the
/// validation metric in its preferred direction.
TrainResult finetune(const ModelBundle *init, const MolTask &task, const MolDataset &data,
                     const RunConfig &run);

// Denormalized predictions for task `task`; binary tasks yield probabilities.
std::vector<double> predict_molecules(const ModelBundle &bundle,
                                      const std::vector<MolRecord> &records, int task = 0);

// Per-atom predictions in original units, one vector per record.
std::vector<std::vector<double>> predict_atoms(const ModelBundle &bundle,
                                               const std::vector<AtomRecord> &records,
                                               int task);

// Metric of `bundle` task `task` on `records`.
double evaluate_molecules(const ModelBundle &bundle, const std::vector<MolRecord> &records,
                          int task = 0);

}  // namespace molshift

#endif  // MOLSHIFT_TRAINPIPE_TRAIN_HPP_
