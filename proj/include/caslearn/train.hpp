// train.hpp
//   The three training regimes: contrastive pre-training over augmented view
//   pairs, supervised fine-tuning on log2 popularity, and teacher-student
//   distillation over pseudo-labels. One loop owns the model; runs are
//   reproducible for a fixed seed.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "caslearn/adam.hpp"
#include "caslearn/augment.hpp"
#include "caslearn/dataset.hpp"
#include "caslearn/encoder.hpp"

namespace caslearn {

struct ContrastiveParams {
  int batch_size = 64;
  double temperature = 0.1;
  int epochs = 30;
  int patience = 20;       // on training loss
  bool use_unlabeled = true;
  AugmentParams augment;

  void validate() const;
};

struct StopDecision {
  bool stop = false;
  int best_epoch = 0;  // 1-indexed argmin (first occurrence)
};

// Stop once the monitored loss has not improved for `patience` consecutive
// epochs; pure function over the history.
StopDecision early_stop(const std::vector<double>& history, int patience = 20);

// One JSON line per epoch lands in the metrics sink.
struct EpochRecord {
  std::string phase;
  int epoch = 0;
  double loss = 0.0;
  std::optional<double> val_loss;
  std::optional<double> test_msle;
  uint64_t seed = 0;
  long wall_ms = 0;
};
using MetricsSink = std::function<void(const EpochRecord&)>;

// Contrastive pre-training on the training-split labeled pool plus (by
// default) the unlabeled pool, labels ignored. Returns the checkpoint with
// minimal epoch training loss.
EncoderModel pretrain(const CascadeDataset& ds, EncoderModel model, const ContrastiveParams& params,
                      const AdamConfig& opt, uint64_t seed, const MetricsSink& sink = {});

enum class Task : uint8_t { popularity, outbreak };

struct FinetuneOptions {
  int cut_layer = 1;        // task head attaches after this projection-head layer
  int epochs = 100;
  int batch_size = 64;
  int patience = 20;        // on validation loss
  double label_fraction = 1.0;
  bool freeze_encoder = false;  // linear evaluation: train the task head only
  AdamConfig opt;
};

struct FinetuneResult {
  TaskModel model;
  std::vector<double> val_history;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  double test_msle = 0.0;
};

FinetuneResult finetune(const CascadeDataset& ds, const EncoderModel& init, const FinetuneOptions& opts,
                        uint64_t seed, const MetricsSink& sink = {});

// Balanced binary cascade dataset for the outbreak task.
struct BinaryDataset {
  DatasetConfig config;
  std::vector<CascadeGraph> graphs;
  std::vector<int> labels;  // 1 = outbreak
  std::vector<Split> splits;
};

struct OutbreakResult {
  TaskModel model;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  double test_accuracy = 0.0;
};

OutbreakResult finetune_outbreak(const BinaryDataset& ds, const EncoderModel& init,
                                 const FinetuneOptions& opts, uint64_t seed,
                                 const MetricsSink& sink = {});

enum class DistillPool : uint8_t { labeled, unlabeled, both };

struct DistillOptions {
  DistillPool pool = DistillPool::both;
  bool self_distill = true;          // student initialized from teacher weights
  int student_width_multiplier = 0;  // > 0: fresh, narrower student instead
  int epochs = 100;
  int batch_size = 64;
  int patience = 20;  // on validation MSLE
  AdamConfig opt;
};

struct DistillResult {
  TaskModel student;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  double test_msle = 0.0;
};

DistillResult distill(const TaskModel& teacher, const CascadeDataset& ds, const DistillOptions& opts,
                      uint64_t seed, const MetricsSink& sink = {});

// Test-split MSLE of a task model (log2 space).
double evaluate_msle(const TaskModel& model, const CascadeDataset& ds, Split split = Split::test);

}  // namespace caslearn
