// caslearn: cascade representation learning from the command line.
//   Verbs: synth, ingest, augment, pretrain, finetune, distill, eval, run.
//   Settings layer as defaults < CASLEARN_* environment < --config file <
//   flags. Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "caslearn/augment.hpp"
#include "caslearn/config.hpp"
#include "caslearn/error.hpp"
#include "caslearn/eval.hpp"
#include "caslearn/kernels.hpp"

namespace fs = std::filesystem;
using namespace caslearn;

namespace {

struct FlagBinding {
  CLI::Option* opt;
  std::string key;
  std::shared_ptr<std::string> store;
};

void report(const MetricsReport& r) {
  std::printf("task=%s metric=%s mean=%.6f std=%.6f over %zu seed(s)\n", r.task.c_str(),
              r.metric.c_str(), r.mean, r.stddev, r.per_seed.size());
  for (std::size_t i = 0; i < r.per_seed.size(); ++i)
    std::printf("  seed %llu: %.6f\n", static_cast<unsigned long long>(r.seeds[i]), r.per_seed[i]);
}

CascadeDataset load_for(const ExperimentConfig& cfg) {
  if (cfg.data_paths.empty())
    return generate_synthetic(cfg.synth_cascades, cfg.data, cfg.synth, cfg.data.seed);
  int target = cfg.target_dataset >= 0 ? cfg.target_dataset : static_cast<int>(cfg.data_paths.size()) - 1;
  return load_dataset(cfg.data_paths[static_cast<size_t>(target)], cfg.data);
}

int cmd_synth(const ExperimentConfig& cfg) {
  const std::string dir = cfg.out_dir.empty() ? "." : cfg.out_dir;
  fs::create_directories(dir);
  auto graphs = generate_synthetic_graphs(cfg.synth_cascades, cfg.synth, cfg.data.dataset_end_time,
                                          cfg.data.seed);
  save_cascades(dir + "/cascades.txt", graphs);
  CascadeDataset ds = assemble_dataset(std::move(graphs), cfg.data);
  std::ofstream mf(dir + "/manifest.txt");
  mf << dataset_manifest(ds);
  std::printf("wrote %s/cascades.txt (%d cascades; %zu labeled, %zu unlabeled after filters)\n",
              dir.c_str(), cfg.synth_cascades, ds.labeled.size(), ds.unlabeled.size());
  return 0;
}

int cmd_ingest(const ExperimentConfig& cfg) {
  if (cfg.data_paths.empty()) raise(Errc::config_error, "ingest: --data <file> is required");
  CascadeDataset ds = load_for(cfg);
  std::string manifest = dataset_manifest(ds);
  std::fputs(manifest.c_str(), stdout);
  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    std::ofstream mf(cfg.out_dir + "/manifest.txt");
    mf << manifest;
    std::vector<CascadeGraph> observed;
    for (const LabeledCascade& lc : ds.labeled) observed.push_back(lc.observed);
    for (const CascadeGraph& g : ds.unlabeled) observed.push_back(g);
    save_cascades(cfg.out_dir + "/observed.txt", observed);
  }
  return 0;
}

int cmd_augment(const ExperimentConfig& cfg, uint64_t seed) {
  CascadeDataset ds = load_for(cfg);
  AugmentParams aug = cfg.augment;
  if (cfg.fit_lambda) aug.sim.lambda = fit_global_rate(ds);

  const std::string dir = cfg.out_dir.empty() ? "." : cfg.out_dir;
  fs::create_directories(dir);
  std::ofstream out(dir + "/augmented.txt");
  std::ofstream stats(dir + "/augment_stats.jsonl");

  std::vector<const CascadeGraph*> pool;
  for (int idx : ds.split_indices(Split::train)) pool.push_back(&ds.labeled[static_cast<size_t>(idx)].observed);
  for (const CascadeGraph& g : ds.unlabeled) pool.push_back(&g);

  const auto t0 = std::chrono::steady_clock::now();
  long total_added = 0, total_removed = 0;
  for (const CascadeGraph* g : pool) {
    AugSimStats s1, s2;
    ViewPair vp = make_views(*g, aug, ds.config.window.t_o, seed, 0, &s1, &s2);
    out << serialize_cascade(vp.view1) << "\n" << serialize_cascade(vp.view2) << "\n";
    // walk views only shrink; report the shrinkage as removals
    if (aug.strategy != AugStrategy::aug_sim) s2.removed = g->size() - vp.view2.size();
    if (aug.strategy == AugStrategy::aug_rwr) s1.removed = g->size() - vp.view1.size();
    total_added += s1.added + s2.added;
    total_removed += s1.removed + s2.removed;
    nlohmann::json j;
    j["id"] = g->id();
    j["nodes"] = g->size();
    j["view1_nodes"] = vp.view1.size();
    j["view2_nodes"] = vp.view2.size();
    j["added"] = s1.added + s2.added;
    j["removed"] = s1.removed + s2.removed;
    stats << j.dump() << "\n";
  }
  const long ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  nlohmann::json tail;
  tail["cascades"] = pool.size();
  tail["added"] = total_added;
  tail["removed"] = total_removed;
  tail["lambda"] = aug.sim.lambda;
  tail["wall_ms"] = ms;
  stats << tail.dump() << "\n";
  std::printf("augmented %zu cascades in %ld ms -> %s/augmented.txt\n", pool.size(), ms, dir.c_str());
  return 0;
}

int cmd_eval(const ExperimentConfig& cfg, const std::string& model_path, uint64_t seed) {
  if (model_path.empty()) raise(Errc::config_error, "eval: --model <checkpoint> is required");
  CascadeDataset ds = load_for(cfg);
  TaskModel tm = TaskModel::load(model_path);
  if (cfg.task == Task::popularity) {
    const double msle = evaluate_popularity(tm, ds);
    std::printf("test_msle=%.6f\n", msle);
  } else {
    BinaryDataset bds = build_outbreak_dataset(ds, seed);
    const double acc = evaluate_outbreak(tm, bds);
    std::printf("test_accuracy=%.6f\n", acc);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cascade graph contrastive learning toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "config file (key = value with [section] headers)");
  std::string kernel_lane;
  app.add_option("--kernels", kernel_lane, "force kernel lane: scalar or avx2");

  std::vector<FlagBinding> bindings;
  auto bind = [&](const std::string& flag, const std::string& key, const std::string& desc) {
    auto store = std::make_shared<std::string>();
    FlagBinding b{app.add_option(flag, *store, desc), key, store};
    bindings.push_back(b);
  };

  // data
  bind("--data", "data.path", "cascade file(s), comma separated; last is the target");
  bind("--target", "data.target", "index of the target dataset for finetune/eval");
  bind("--t-o", "data.t_o", "observation horizon");
  bind("--t-p", "data.t_p", "prediction horizon");
  bind("--min-observed", "data.min_observed_nodes", "minimum observed nodes per cascade");
  bind("--max-observed", "data.max_observed_nodes", "cap on observed nodes per cascade");
  bind("--dataset-end-time", "data.dataset_end_time", "absolute end of the dataset span");
  bind("--data-seed", "data.seed", "seed for splits and synthetic data");
  // synthetic generator
  bind("--synth-cascades", "synth.cascades", "number of synthetic cascades");
  bind("--synth-branching", "synth.branching_mean", "synthetic size-law scale");
  bind("--synth-rate", "synth.time_rate", "synthetic adoption delay rate");
  bind("--synth-max-size", "synth.max_size", "synthetic cascade size cap");
  // encoder
  bind("--feature-mode", "encoder.feature_mode", "structural or wavelet");
  bind("--wavelet-scale", "encoder.wavelet_scale", "heat kernel scale");
  bind("--wavelet-samples", "encoder.wavelet_samples", "characteristic function samples");
  bind("--embedding-dim", "encoder.embedding_dim", "node embedding width");
  bind("--base-width", "encoder.base_width", "hidden width at model size 1x");
  bind("--model-size", "encoder.model_size", "hidden width multiplier");
  bind("--head-design", "encoder.head_design", "projection head i-j, e.g. 4-1");
  // augmentation
  bind("--aug-strategy", "augment.strategy", "augsim, augrwr or augsim+augrwr");
  bind("--aug-strength", "augment.eta", "augmentation strength");
  bind("--theta-t", "augment.theta_t", "local/global adoption-time weight");
  bind("--lambda", "augment.lambda", "exponential rate (use --fit-lambda=false to pin)");
  bind("--fit-lambda", "augment.fit_lambda", "fit the rate from data at run time");
  bind("--strength-mode", "augment.strength_mode", "absolute or per_node");
  bind("--restart-prob", "augment.restart_prob", "walk restart probability");
  bind("--walk-budget", "augment.walk_budget", "walk steps per node");
  // training
  bind("--batch-size", "train.batch_size", "cascades per training step");
  bind("--temperature", "train.temperature", "contrastive temperature");
  bind("--pretrain-epochs", "train.pretrain_epochs", "pre-training epoch budget");
  bind("--finetune-epochs", "train.finetune_epochs", "fine-tuning epoch budget");
  bind("--distill-epochs", "train.distill_epochs", "distillation epoch budget");
  bind("--patience", "train.patience", "early stopping patience");
  bind("--learning-rate", "train.learning_rate", "optimizer learning rate");
  bind("--use-unlabeled", "train.use_unlabeled", "include unlabeled cascades in pre-training");
  bind("--freeze", "train.freeze_encoder", "linear evaluation: train the task head only");
  bind("--distill-pool", "train.distill_pool", "label, unlabel or label+unlabel");
  bind("--student-width", "train.student_width_multiplier", "width multiplier of a fresh student");
  // experiment
  bind("--task", "experiment.task", "popularity or outbreak");
  bind("--phases", "experiment.phases", "comma list of pretrain,finetune,distill,eval");
  bind("--label-fraction", "experiment.label_fraction", "training label fraction");
  bind("--seeds", "experiment.seeds", "comma list of run seeds");
  bind("--seed", "experiment.seeds", "single run seed");
  bind("--out-dir", "experiment.out_dir", "artifact directory");
  bind("--init", "experiment.init_checkpoint", "encoder checkpoint to start finetuning from");
  bind("--teacher", "experiment.teacher_checkpoint", "task checkpoint to distill from");

  CLI::App* c_synth = app.add_subcommand("synth", "generate a synthetic cascade file");
  CLI::App* c_ingest = app.add_subcommand("ingest", "parse, filter and summarize a cascade file");
  CLI::App* c_augment = app.add_subcommand("augment", "write augmented views plus a stats report");
  CLI::App* c_pretrain = app.add_subcommand("pretrain", "contrastive pre-training only");
  CLI::App* c_finetune = app.add_subcommand("finetune", "supervised fine-tuning (+ eval)");
  CLI::App* c_distill = app.add_subcommand("distill", "teacher-student distillation (+ eval)");
  CLI::App* c_eval = app.add_subcommand("eval", "evaluate a saved task model");
  CLI::App* c_run = app.add_subcommand("run", "execute the configured phase plan");

  std::string model_path;
  c_eval->add_option("--model", model_path, "task model checkpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad flags are configuration errors
  }

  try {
    if (!kernel_lane.empty()) {
      if (kernel_lane == "scalar")
        kern::force_lane(kern::Lane::scalar);
      else if (kernel_lane == "avx2" && kern::avx2_available())
        kern::force_lane(kern::Lane::avx2);
      else
        raise(Errc::config_error, "unknown or unavailable kernel lane '" + kernel_lane + "'");
    }

    ExperimentConfig cfg;
    apply_config(cfg, env_overrides());
    if (!config_path.empty()) apply_config(cfg, read_config_file(config_path));
    ConfigMap flag_map;
    for (const FlagBinding& b : bindings)
      if (b.opt->count() > 0) flag_map[b.key] = *b.store;
    apply_config(cfg, flag_map);

    const uint64_t first_seed = cfg.seeds.empty() ? 1 : cfg.seeds.front();

    if (c_synth->parsed()) return cmd_synth(cfg);
    if (c_ingest->parsed()) return cmd_ingest(cfg);
    if (c_augment->parsed()) return cmd_augment(cfg, first_seed);
    if (c_eval->parsed()) return cmd_eval(cfg, model_path, first_seed);

    if (c_pretrain->parsed()) cfg.phases = {true, false, false, false};
    if (c_finetune->parsed()) cfg.phases = {false, true, false, true};
    if (c_distill->parsed()) cfg.phases = {false, false, true, true};
    // `run` keeps the configured plan

    ExperimentResult res = run_experiment(cfg);
    if (c_pretrain->parsed()) {
      std::printf("pre-trained %zu seed(s)%s\n", cfg.seeds.size(),
                  cfg.out_dir.empty() ? "" : (" -> " + cfg.out_dir).c_str());
    } else {
      report(res.report);
    }
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
