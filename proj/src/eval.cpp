#include "caslearn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "caslearn/config.hpp"
#include "caslearn/error.hpp"
#include "caslearn/rng.hpp"

namespace caslearn {

namespace fs = std::filesystem;
using nlohmann::json;

MetricsReport MetricsReport::aggregate(std::string task, std::string metric,
                                       std::vector<uint64_t> seeds, std::vector<double> values) {
  if (values.empty() || values.size() != seeds.size())
    raise(Errc::empty_set, "metrics: need one value per seed");
  MetricsReport r;
  r.task = std::move(task);
  r.metric = std::move(metric);
  r.seeds = std::move(seeds);
  r.per_seed = std::move(values);
  double total = 0.0;
  for (double v : r.per_seed) total += v;
  r.mean = total / static_cast<double>(r.per_seed.size());
  if (r.per_seed.size() > 1) {
    double ss = 0.0;
    for (double v : r.per_seed) ss += (v - r.mean) * (v - r.mean);
    r.stddev = std::sqrt(ss / static_cast<double>(r.per_seed.size() - 1));
  }
  return r;
}

double evaluate_popularity(const TaskModel& model, const CascadeDataset& ds) {
  return evaluate_msle(model, ds, Split::test);
}

BinaryDataset build_outbreak_dataset(const CascadeDataset& ds, uint64_t seed) {
  BinaryDataset out;
  out.config = ds.config;
  for (Split split : {Split::train, Split::val, Split::test}) {
    std::vector<int> idx = ds.split_indices(split);
    if (idx.empty()) raise(Errc::too_few_positives, "outbreak dataset: empty labeled split");
    std::vector<int> labels;
    labels.reserve(idx.size());
    for (int i : idx) labels.push_back(ds.labeled[static_cast<size_t>(i)].label);
    // nearest-rank 90th percentile; outbreaks are strictly above it
    std::vector<int> sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t rank =
        static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(sorted.size())));
    const int threshold = sorted[std::min(sorted.size() - 1, rank == 0 ? 0 : rank - 1)];

    std::vector<int> positives, negatives;
    for (int i : idx) {
      (ds.labeled[static_cast<size_t>(i)].label > threshold ? positives : negatives).push_back(i);
    }
    if (positives.size() < 2)
      raise(Errc::too_few_positives, "outbreak dataset: fewer than 2 outbreak cascades in a split");

    Rng rng(derive_seed(seed, "outbreak-undersample", static_cast<uint64_t>(split)));
    rng.shuffle(negatives);
    negatives.resize(positives.size());  // balanced by construction

    for (int i : positives) {
      out.graphs.push_back(ds.labeled[static_cast<size_t>(i)].observed);
      out.labels.push_back(1);
      out.splits.push_back(split);
    }
    for (int i : negatives) {
      out.graphs.push_back(ds.labeled[static_cast<size_t>(i)].observed);
      out.labels.push_back(0);
      out.splits.push_back(split);
    }
  }
  return out;
}

double evaluate_outbreak(const TaskModel& model, const BinaryDataset& ds) {
  int correct = 0, total = 0;
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    if (ds.splits[i] != Split::test) continue;
    const double logit = model.predict_value(ds.graphs[i], ds.config.window.t_o);
    const int pred = 1.0 / (1.0 + std::exp(-logit)) > 0.5 ? 1 : 0;
    correct += pred == ds.labels[i] ? 1 : 0;
    ++total;
  }
  if (total == 0) raise(Errc::empty_test_split, "evaluate_outbreak: empty test split");
  return static_cast<double>(correct) / static_cast<double>(total);
}

void ExperimentConfig::validate() const {
  data.validate();
  encoder.validate();
  if (seeds.empty()) raise(Errc::config_error, "experiment: need at least one seed");
  if (!(label_frac > 0.0) || label_frac > 1.0)
    raise(Errc::config_error, "experiment: label fraction must lie in (0, 1]");
  if (task == Task::outbreak && phases.distill)
    raise(Errc::config_error, "experiment: distillation applies to the popularity task only");
  if (phases.distill && !phases.finetune && teacher_checkpoint.empty())
    raise(Errc::config_error, "experiment: distillation needs a finetune phase or a teacher checkpoint");
}

namespace {

json record_to_json(const EpochRecord& rec) {
  json j;
  j["phase"] = rec.phase;
  j["epoch"] = rec.epoch;
  j["loss"] = rec.loss;
  if (rec.val_loss) j["val_loss"] = *rec.val_loss;
  if (rec.test_msle) j["test_msle"] = *rec.test_msle;
  j["seed"] = rec.seed;
  j["wall_ms"] = rec.wall_ms;
  return j;
}

CascadeDataset load_experiment_data(const ExperimentConfig& cfg, int which) {
  if (cfg.data_paths.empty()) return generate_synthetic(cfg.synth_cascades, cfg.data, cfg.synth, cfg.data.seed);
  return load_dataset(cfg.data_paths[static_cast<size_t>(which)], cfg.data);
}

// union of pools for cross-dataset pre-training: labeled entries keep their
// split tags (only train-split graphs ever feed pre-training), unlabeled
// pools concatenate
CascadeDataset merge_for_pretraining(std::vector<CascadeDataset> parts) {
  CascadeDataset merged = std::move(parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i) {
    for (LabeledCascade& lc : parts[i].labeled) merged.labeled.push_back(std::move(lc));
    for (CascadeGraph& g : parts[i].unlabeled) merged.unlabeled.push_back(std::move(g));
  }
  return merged;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  if (cfg.phases.finetune) cfg.encoder.validate();

  // data is shared across seeds; model/init/augmentation randomness is not
  const int n_datasets = cfg.data_paths.empty() ? 1 : static_cast<int>(cfg.data_paths.size());
  const int target = cfg.target_dataset >= 0 ? cfg.target_dataset : n_datasets - 1;
  if (target >= n_datasets) raise(Errc::config_error, "experiment: target dataset index out of range");

  std::vector<CascadeDataset> datasets;
  datasets.reserve(static_cast<size_t>(n_datasets));
  for (int i = 0; i < n_datasets; ++i) datasets.push_back(load_experiment_data(cfg, i));
  CascadeDataset target_ds = datasets[static_cast<size_t>(target)];
  CascadeDataset pretrain_ds =
      n_datasets == 1 ? target_ds : merge_for_pretraining(std::move(datasets));

  ExperimentResult result;
  std::vector<double> per_seed;

  for (uint64_t seed : cfg.seeds) {
    // the seeded label subsample applies to every phase of this run
    CascadeDataset run_ds = cfg.label_frac < 1.0 ? label_fraction(target_ds, cfg.label_frac, seed) : target_ds;
    CascadeDataset run_pretrain_ds =
        n_datasets == 1 ? run_ds
                        : (cfg.label_frac < 1.0 ? label_fraction(pretrain_ds, cfg.label_frac, seed)
                                                : pretrain_ds);

    AugmentParams aug = cfg.augment;
    if (cfg.fit_lambda) aug.sim.lambda = fit_global_rate(run_pretrain_ds);

    fs::path seed_dir;
    std::ofstream metrics_out;
    if (!cfg.out_dir.empty()) {
      seed_dir = fs::path(cfg.out_dir) / ("seed_" + std::to_string(seed));
      fs::create_directories(seed_dir);
      metrics_out.open(seed_dir / "metrics.jsonl");
      result.artifact_dirs.push_back(seed_dir.string());
    }
    MetricsSink sink = [&metrics_out](const EpochRecord& rec) {
      if (metrics_out.is_open()) metrics_out << record_to_json(rec).dump() << "\n";
    };

    AdamConfig opt;
    opt.lr = cfg.learning_rate;

    // encoder: pretrained here, loaded, or randomly initialized (Base)
    EncoderModel enc;
    if (cfg.phases.pretrain) {
      ContrastiveParams cp;
      cp.batch_size = cfg.batch_size;
      cp.temperature = cfg.temperature;
      cp.epochs = cfg.pretrain_epochs;
      cp.patience = cfg.patience;
      cp.use_unlabeled = cfg.use_unlabeled;
      cp.augment = aug;
      enc = pretrain(run_pretrain_ds, EncoderModel::random_init(cfg.encoder, derive_seed(seed, "init")),
                     cp, opt, seed, sink);
      if (!seed_dir.empty()) enc.save((seed_dir / "pretrained.ckpt").string());
    } else if (!cfg.init_checkpoint.empty()) {
      enc = EncoderModel::load(cfg.init_checkpoint);
    } else {
      enc = EncoderModel::random_init(cfg.encoder, derive_seed(seed, "init"));
    }

    double metric_value = 0.0;

    if (cfg.task == Task::popularity) {
      FinetuneOptions fo;
      fo.cut_layer = cfg.encoder.finetune_layer;
      fo.epochs = cfg.finetune_epochs;
      fo.batch_size = cfg.batch_size;
      fo.patience = cfg.patience;
      fo.freeze_encoder = cfg.freeze_encoder;
      fo.opt = opt;

      TaskModel task_model;
      bool have_model = false;
      if (cfg.phases.finetune) {
        FinetuneResult fr = finetune(run_ds, enc, fo, seed, sink);
        task_model = std::move(fr.model);
        have_model = true;
        if (!seed_dir.empty()) task_model.save((seed_dir / "finetuned.ckpt").string());
      } else if (!cfg.teacher_checkpoint.empty()) {
        task_model = TaskModel::load(cfg.teacher_checkpoint);
        have_model = true;
      }

      if (cfg.phases.distill) {
        if (!have_model) raise(Errc::no_teacher, "experiment: no teacher available for distillation");
        DistillOptions dopt;
        dopt.pool = cfg.distill_pool;
        dopt.self_distill = cfg.student_width_multiplier == 0;
        dopt.student_width_multiplier = cfg.student_width_multiplier;
        dopt.epochs = cfg.distill_epochs;
        dopt.batch_size = cfg.batch_size;
        dopt.patience = cfg.patience;
        dopt.opt = opt;
        DistillResult dr = distill(task_model, run_ds, dopt, seed, sink);
        task_model = std::move(dr.student);
        if (!seed_dir.empty()) task_model.save((seed_dir / "distilled.ckpt").string());
      }

      if (cfg.phases.eval) {
        if (!have_model) raise(Errc::config_error, "experiment: eval phase needs a trained model");
        metric_value = evaluate_popularity(task_model, run_ds);
        sink({"eval", 0, 0.0, std::nullopt, metric_value, seed, 0});
      }
    } else {
      BinaryDataset bds = build_outbreak_dataset(run_ds, seed);
      FinetuneOptions fo;
      fo.cut_layer = cfg.encoder.finetune_layer;
      fo.epochs = cfg.finetune_epochs;
      fo.batch_size = cfg.batch_size;
      fo.patience = cfg.patience;
      fo.freeze_encoder = cfg.freeze_encoder;
      fo.opt = opt;
      OutbreakResult orr = finetune_outbreak(bds, enc, fo, seed, sink);
      if (!seed_dir.empty()) orr.model.save((seed_dir / "finetuned.ckpt").string());
      if (cfg.phases.eval) metric_value = orr.test_accuracy;  // accuracy lands in summary.json
    }

    per_seed.push_back(metric_value);
  }

  const bool popularity = cfg.task == Task::popularity;
  result.report = MetricsReport::aggregate(popularity ? "popularity" : "outbreak",
                                           popularity ? "test_msle" : "test_accuracy", cfg.seeds,
                                           std::move(per_seed));

  if (!cfg.out_dir.empty()) {
    json summary;
    summary["task"] = result.report.task;
    summary["metric"] = result.report.metric;
    summary["seeds"] = result.report.seeds;
    summary["per_seed"] = result.report.per_seed;
    summary["mean"] = result.report.mean;
    summary["std"] = result.report.stddev;
    std::ofstream out(fs::path(cfg.out_dir) / "summary.json");
    out << summary.dump(2) << "\n";
    std::ofstream manifest(fs::path(cfg.out_dir) / "manifest.cfg");
    manifest << write_config(cfg);
  }
  return result;
}

}  // namespace caslearn
