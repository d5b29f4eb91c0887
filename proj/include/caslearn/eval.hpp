// eval.hpp
//   Downstream task evaluation and the experiment driver: per-seed phase
//   plans (pretrain / finetune / distill / eval), metrics aggregation, and
//   artifact persistence (checkpoints, metrics JSONL, manifest).

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "caslearn/train.hpp"

namespace caslearn {

struct MetricsReport {
  std::string task;    // "popularity" or "outbreak"
  std::string metric;  // "test_msle" or "test_accuracy"
  std::vector<uint64_t> seeds;
  std::vector<double> per_seed;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single seed

  static MetricsReport aggregate(std::string task, std::string metric, std::vector<uint64_t> seeds,
                                 std::vector<double> values);
};

double evaluate_popularity(const TaskModel& model, const CascadeDataset& ds);

// Positives are the top decile by label, thresholded at the 90th percentile
// within each split (strictly above); negatives are undersampled to the same
// count with the given seed, so every split is exactly balanced.
BinaryDataset build_outbreak_dataset(const CascadeDataset& ds, uint64_t seed);

double evaluate_outbreak(const TaskModel& model, const BinaryDataset& ds);

struct PhasePlan {
  bool pretrain = true;
  bool finetune = true;
  bool distill = true;
  bool eval = true;
};

struct ExperimentConfig {
  // data: file paths (comma-joined for transfer runs) or synthetic when empty
  std::vector<std::string> data_paths;
  int target_dataset = -1;  // index into data_paths for finetune/eval; -1 = last
  int synth_cascades = 2000;
  SyntheticParams synth;
  DatasetConfig data;

  EncoderConfig encoder;
  AugmentParams augment;
  bool fit_lambda = true;  // fit the exponential rate from the data at run time

  int batch_size = 64;
  double temperature = 0.1;
  int pretrain_epochs = 30;
  int finetune_epochs = 100;
  int distill_epochs = 100;
  int patience = 20;
  double learning_rate = 5e-4;
  bool use_unlabeled = true;
  bool freeze_encoder = false;
  DistillPool distill_pool = DistillPool::both;
  int student_width_multiplier = 0;  // 0 = self-distillation

  Task task = Task::popularity;
  PhasePlan phases;
  double label_frac = 1.0;
  std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
  std::string out_dir;  // empty = no artifacts

  // standalone stages
  std::string init_checkpoint;     // encoder for finetune when pretrain is skipped
  std::string teacher_checkpoint;  // task model for distill when finetune is skipped

  void validate() const;
};

struct ExperimentResult {
  MetricsReport report;
  std::vector<std::string> artifact_dirs;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace caslearn
