#include "caslearn/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "caslearn/error.hpp"
#include "caslearn/losses.hpp"
#include "caslearn/rng.hpp"

namespace caslearn {

namespace {

using Clock = std::chrono::steady_clock;

long ms_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

std::vector<std::vector<double>> collect_grads(const std::vector<ad::Var>& vars) {
  std::vector<std::vector<double>> grads;
  grads.reserve(vars.size());
  for (const ad::Var& v : vars) grads.push_back(v.grad());
  return grads;
}

void check_finite(const ParamSet& params, const char* phase) {
  for (const ParamTensor& t : params)
    for (double v : t.value)
      if (!std::isfinite(v))
        raise(Errc::numeric_failure,
              std::string(phase) + ": non-finite value in parameter '" + t.name + "'");
}

void emit(const MetricsSink& sink, const EpochRecord& rec) {
  if (sink) sink(rec);
}

// graphs a pre-training or distillation pass may see: training-split labeled
// plus, when asked, the unlabeled pool; never validation or test graphs
std::vector<const CascadeGraph*> unsupervised_pool(const CascadeDataset& ds, bool with_labeled,
                                                   bool with_unlabeled) {
  std::vector<const CascadeGraph*> pool;
  if (with_labeled)
    for (int idx : ds.split_indices(Split::train))
      pool.push_back(&ds.labeled[static_cast<size_t>(idx)].observed);
  if (with_unlabeled)
    for (const CascadeGraph& g : ds.unlabeled) pool.push_back(&g);
  return pool;
}

}  // namespace

void ContrastiveParams::validate() const {
  if (batch_size < 2) raise(Errc::config_error, "contrastive params: batch size must be >= 2");
  if (!(temperature > 0.0)) raise(Errc::config_error, "contrastive params: temperature must be positive");
  if (epochs < 1) raise(Errc::config_error, "contrastive params: epochs must be >= 1");
}

StopDecision early_stop(const std::vector<double>& history, int patience) {
  if (history.empty()) raise(Errc::empty_set, "early_stop: empty history");
  StopDecision d;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (history[i] < best) {
      best = history[i];
      d.best_epoch = static_cast<int>(i) + 1;
    }
  }
  d.stop = static_cast<int>(history.size()) - d.best_epoch >= patience;
  return d;
}

EncoderModel pretrain(const CascadeDataset& ds, EncoderModel model, const ContrastiveParams& params,
                      const AdamConfig& opt, uint64_t seed, const MetricsSink& sink) {
  params.validate();
  const auto pool = unsupervised_pool(ds, true, params.use_unlabeled);
  const int B = params.batch_size;
  if (static_cast<int>(pool.size()) < B)
    raise(Errc::insufficient_data, "pretrain: pool smaller than one batch (" +
                                       std::to_string(pool.size()) + " < " + std::to_string(B) + ")");
  const double t_o = ds.config.window.t_o;

  AdamState adam{opt};
  std::vector<double> history;
  double best_loss = std::numeric_limits<double>::infinity();
  ParamSet best_params = model.params();

  std::vector<int> order(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 1; epoch <= params.epochs; ++epoch) {
    const auto t_start = Clock::now();
    Rng shuffle_rng(derive_seed(seed, "pretrain-epoch", static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    int batches = 0;
    // incomplete tail dropped: the contrastive loss needs the full 2B views
    for (std::size_t start = 0; start + static_cast<std::size_t>(B) <= order.size(); start += B) {
      ad::Tape tape;
      EncoderModel::Bound bound = model.bind(tape);
      std::vector<ad::Var> views;
      views.reserve(static_cast<std::size_t>(2 * B));
      for (int j = 0; j < B; ++j) {
        const CascadeGraph& g = *pool[static_cast<std::size_t>(order[start + j])];
        ViewPair pair = make_views(g, params.augment, t_o, seed, static_cast<uint64_t>(epoch));
        views.push_back(model.project(bound, model.encode(bound, tape, pair.view1, t_o)));
        views.push_back(model.project(bound, model.encode(bound, tape, pair.view2, t_o)));
      }
      ad::Var loss = nt_xent_loss(tape, views, params.temperature);
      tape.backward(loss);
      adam.step(model.params(), collect_grads(bound.vars));
      check_finite(model.params(), "pretrain");
      loss_sum += loss.scalar();
      ++batches;
    }
    const double epoch_loss = batches > 0 ? loss_sum / batches : 0.0;
    history.push_back(epoch_loss);
    if (epoch_loss < best_loss) {
      best_loss = epoch_loss;
      best_params = model.params();
    }
    emit(sink, {"pretrain", epoch, epoch_loss, std::nullopt, std::nullopt, seed, ms_since(t_start)});
    if (early_stop(history, params.patience).stop) break;
  }
  model.params() = best_params;
  return model;
}

namespace {

double split_msle(const TaskModel& tm, const CascadeDataset& ds, Split split) {
  std::vector<double> preds;
  std::vector<int> labels;
  for (int idx : ds.split_indices(split)) {
    const LabeledCascade& lc = ds.labeled[static_cast<size_t>(idx)];
    preds.push_back(tm.predict_value(lc.observed, ds.config.window.t_o));
    labels.push_back(lc.label);
  }
  if (preds.empty()) raise(Errc::empty_test_split, "evaluate: split has no labeled cascades");
  return msle_value(preds, labels);
}

}  // namespace

double evaluate_msle(const TaskModel& model, const CascadeDataset& ds, Split split) {
  return split_msle(model, ds, split);
}

FinetuneResult finetune(const CascadeDataset& ds_in, const EncoderModel& init,
                        const FinetuneOptions& opts, uint64_t seed, const MetricsSink& sink) {
  const CascadeDataset ds =
      opts.label_fraction < 1.0 ? label_fraction(ds_in, opts.label_fraction, seed) : ds_in;
  std::vector<int> train_idx = ds.split_indices(Split::train);
  if (train_idx.empty()) raise(Errc::no_labeled_data, "finetune: no labeled training cascades");
  const double t_o = ds.config.window.t_o;

  TaskModel tm(init, opts.cut_layer, derive_seed(seed, "task-head"));
  AdamState enc_adam{opts.opt}, head_adam{opts.opt};

  std::vector<double> history;
  double best_val = std::numeric_limits<double>::infinity();
  ParamSet best_enc = tm.encoder().params();
  ParamSet best_head = tm.head_params();
  int best_epoch = 0;

  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    const auto t_start = Clock::now();
    Rng shuffle_rng(derive_seed(seed, "finetune-epoch", static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(train_idx);

    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < train_idx.size(); start += static_cast<std::size_t>(opts.batch_size)) {
      const std::size_t stop = std::min(train_idx.size(), start + static_cast<std::size_t>(opts.batch_size));
      ad::Tape tape;
      TaskModel::Bound bound = tm.bind(tape);
      std::vector<ad::Var> preds;
      std::vector<int> labels;
      for (std::size_t j = start; j < stop; ++j) {
        const LabeledCascade& lc = ds.labeled[static_cast<size_t>(train_idx[j])];
        preds.push_back(tm.predict(bound, tape, lc.observed, t_o));
        labels.push_back(lc.label);
      }
      ad::Var loss = msle_loss(tape, preds, labels);
      tape.backward(loss);
      if (!opts.freeze_encoder) enc_adam.step(tm.encoder().params(), collect_grads(bound.enc.vars));
      head_adam.step(tm.head_params(), collect_grads(bound.head_vars));
      check_finite(tm.encoder().params(), "finetune");
      check_finite(tm.head_params(), "finetune");
      loss_sum += loss.scalar();
      ++batches;
    }
    const double train_loss = batches > 0 ? loss_sum / batches : 0.0;
    const double val_loss = split_msle(tm, ds, Split::val);
    history.push_back(val_loss);
    if (val_loss < best_val) {
      best_val = val_loss;
      best_enc = tm.encoder().params();
      best_head = tm.head_params();
      best_epoch = epoch;
    }
    emit(sink, {"finetune", epoch, train_loss, val_loss, std::nullopt, seed, ms_since(t_start)});
    if (early_stop(history, opts.patience).stop) break;
  }

  FinetuneResult res{std::move(tm), std::move(history), best_epoch, best_val, 0.0};
  res.model.encoder().params() = std::move(best_enc);
  res.model.head_params() = std::move(best_head);
  res.test_msle = split_msle(res.model, ds, Split::test);
  return res;
}

OutbreakResult finetune_outbreak(const BinaryDataset& ds, const EncoderModel& init,
                                 const FinetuneOptions& opts, uint64_t seed, const MetricsSink& sink) {
  std::vector<int> train_idx;
  for (std::size_t i = 0; i < ds.graphs.size(); ++i)
    if (ds.splits[i] == Split::train) train_idx.push_back(static_cast<int>(i));
  if (train_idx.empty()) raise(Errc::no_labeled_data, "finetune_outbreak: empty training split");
  const double t_o = ds.config.window.t_o;

  TaskModel tm(init, opts.cut_layer, derive_seed(seed, "task-head"));
  AdamState enc_adam{opts.opt}, head_adam{opts.opt};

  auto split_loss = [&](Split split) {
    ad::Tape tape;
    TaskModel::Bound bound = tm.bind(tape);
    std::vector<ad::Var> logits;
    std::vector<int> labels;
    for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
      if (ds.splits[i] != split) continue;
      logits.push_back(tm.predict(bound, tape, ds.graphs[i], t_o));
      labels.push_back(ds.labels[i]);
    }
    if (logits.empty()) raise(Errc::empty_test_split, "finetune_outbreak: empty split");
    return logistic_loss(tape, logits, labels).scalar();
  };

  std::vector<double> history;
  double best_val = std::numeric_limits<double>::infinity();
  ParamSet best_enc = tm.encoder().params();
  ParamSet best_head = tm.head_params();
  int best_epoch = 0;

  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    const auto t_start = Clock::now();
    Rng shuffle_rng(derive_seed(seed, "outbreak-epoch", static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(train_idx);

    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < train_idx.size(); start += static_cast<std::size_t>(opts.batch_size)) {
      const std::size_t stop = std::min(train_idx.size(), start + static_cast<std::size_t>(opts.batch_size));
      ad::Tape tape;
      TaskModel::Bound bound = tm.bind(tape);
      std::vector<ad::Var> logits;
      std::vector<int> labels;
      for (std::size_t j = start; j < stop; ++j) {
        const int idx = train_idx[j];
        logits.push_back(tm.predict(bound, tape, ds.graphs[static_cast<size_t>(idx)], t_o));
        labels.push_back(ds.labels[static_cast<size_t>(idx)]);
      }
      ad::Var loss = logistic_loss(tape, logits, labels);
      tape.backward(loss);
      if (!opts.freeze_encoder) enc_adam.step(tm.encoder().params(), collect_grads(bound.enc.vars));
      head_adam.step(tm.head_params(), collect_grads(bound.head_vars));
      check_finite(tm.encoder().params(), "finetune_outbreak");
      check_finite(tm.head_params(), "finetune_outbreak");
      loss_sum += loss.scalar();
      ++batches;
    }
    const double train_loss = batches > 0 ? loss_sum / batches : 0.0;
    const double val_loss = split_loss(Split::val);
    history.push_back(val_loss);
    if (val_loss < best_val) {
      best_val = val_loss;
      best_enc = tm.encoder().params();
      best_head = tm.head_params();
      best_epoch = epoch;
    }
    emit(sink, {"outbreak", epoch, train_loss, val_loss, std::nullopt, seed, ms_since(t_start)});
    if (early_stop(history, opts.patience).stop) break;
  }

  tm.encoder().params() = std::move(best_enc);
  tm.head_params() = std::move(best_head);

  // accuracy at threshold 0.5 on the balanced test split
  int correct = 0, total = 0;
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    if (ds.splits[i] != Split::test) continue;
    const double p = 1.0 / (1.0 + std::exp(-tm.predict_value(ds.graphs[i], t_o)));
    correct += (p > 0.5 ? 1 : 0) == ds.labels[i] ? 1 : 0;
    ++total;
  }
  if (total == 0) raise(Errc::empty_test_split, "finetune_outbreak: empty test split");
  return OutbreakResult{std::move(tm), best_epoch, best_val,
                        static_cast<double>(correct) / static_cast<double>(total)};
}

DistillResult distill(const TaskModel& teacher, const CascadeDataset& ds, const DistillOptions& opts,
                      uint64_t seed, const MetricsSink& sink) {
  if (teacher.encoder().params().empty()) raise(Errc::no_teacher, "distill: teacher model is empty");
  const double t_o = ds.config.window.t_o;

  const auto pool = unsupervised_pool(ds, opts.pool != DistillPool::unlabeled,
                                      opts.pool != DistillPool::labeled);
  if (pool.empty()) raise(Errc::empty_set, "distill: selected cascade pool is empty");

  // frozen pseudo-labels
  std::vector<double> teacher_pred(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i)
    teacher_pred[i] = teacher.predict_value(*pool[i], t_o);

  TaskModel student;
  if (opts.self_distill) {
    student = teacher;
  } else {
    // fresh (possibly narrower) student
    EncoderConfig cfg = teacher.encoder().config();
    if (opts.student_width_multiplier > 0) cfg.width_multiplier = opts.student_width_multiplier;
    student = TaskModel(EncoderModel::random_init(cfg, derive_seed(seed, "student")),
                        teacher.cut_layer(), derive_seed(seed, "student-head"));
  }

  AdamState enc_adam{opts.opt}, head_adam{opts.opt};
  std::vector<int> order(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) order[i] = static_cast<int>(i);

  std::vector<double> history;
  double best_val = std::numeric_limits<double>::infinity();
  ParamSet best_enc = student.encoder().params();
  ParamSet best_head = student.head_params();
  int best_epoch = 0;

  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    const auto t_start = Clock::now();
    Rng shuffle_rng(derive_seed(seed, "distill-epoch", static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opts.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(opts.batch_size));
      ad::Tape tape;
      TaskModel::Bound bound = student.bind(tape);
      std::vector<ad::Var> preds;
      std::vector<double> targets;
      for (std::size_t j = start; j < stop; ++j) {
        preds.push_back(student.predict(bound, tape, *pool[static_cast<size_t>(order[j])], t_o));
        targets.push_back(teacher_pred[static_cast<size_t>(order[j])]);
      }
      ad::Var loss = distill_loss(tape, preds, targets);
      tape.backward(loss);
      enc_adam.step(student.encoder().params(), collect_grads(bound.enc.vars));
      head_adam.step(student.head_params(), collect_grads(bound.head_vars));
      check_finite(student.encoder().params(), "distill");
      check_finite(student.head_params(), "distill");
      loss_sum += loss.scalar();
      ++batches;
    }
    const double train_loss = batches > 0 ? loss_sum / batches : 0.0;
    const double val_loss = split_msle(student, ds, Split::val);
    history.push_back(val_loss);
    if (val_loss < best_val) {
      best_val = val_loss;
      best_enc = student.encoder().params();
      best_head = student.head_params();
      best_epoch = epoch;
    }
    emit(sink, {"distill", epoch, train_loss, val_loss, std::nullopt, seed, ms_since(t_start)});
    if (early_stop(history, opts.patience).stop) break;
  }

  student.encoder().params() = std::move(best_enc);
  student.head_params() = std::move(best_head);
  const double test = split_msle(student, ds, Split::test);
  return DistillResult{std::move(student), best_epoch, best_val, test};
}

}  // namespace caslearn
