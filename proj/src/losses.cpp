#include "caslearn/losses.hpp"

#include <algorithm>
#include <cmath>

#include "caslearn/error.hpp"

namespace caslearn {

using ad::Var;

Var nt_xent_loss(ad::Tape& tape, const std::vector<Var>& views, double temperature) {
  const int m = static_cast<int>(views.size());
  if (m < 2 || m % 2 != 0)
    raise(Errc::insufficient_data, "nt_xent_loss: need an even number (>= 2) of views");
  if (!(temperature > 0.0)) raise(Errc::config_error, "nt_xent_loss: temperature must be positive");

  // scaled similarities, each unordered pair computed once
  std::vector<Var> sims(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int k = i + 1; k < m; ++k) {
      Var s = ad::affine(ad::cosine_similarity(views[static_cast<std::size_t>(i)],
                                               views[static_cast<std::size_t>(k)]),
                         1.0 / temperature, 0.0);
      sims[static_cast<std::size_t>(i) * m + k] = s;
      sims[static_cast<std::size_t>(k) * m + i] = s;
    }

  std::vector<Var> anchor_losses;
  anchor_losses.reserve(static_cast<std::size_t>(m));
  std::vector<Var> negatives;
  for (int i = 0; i < m; ++i) {
    const int partner = i ^ 1;
    negatives.clear();
    double row_max = -1e300;
    for (int k = 0; k < m; ++k) {
      if (k == i) continue;
      const Var& s = sims[static_cast<std::size_t>(i) * m + k];
      negatives.push_back(s);
      row_max = std::max(row_max, s.scalar());
    }
    // per-anchor -log softmax of the positive, via a shifted logsumexp; the
    // shift is a constant, so gradients are untouched
    Var row = ad::concat_scalars(tape, negatives);
    Var lse = ad::affine(ad::log_op(ad::sum(ad::exp_op(ad::affine(row, 1.0, -row_max)))), 1.0, row_max);
    anchor_losses.push_back(ad::sub(lse, sims[static_cast<std::size_t>(i) * m + partner]));
  }
  return ad::mean(ad::concat_scalars(tape, anchor_losses));
}

Var msle_loss(ad::Tape& tape, const std::vector<Var>& pred_log2, const std::vector<int>& labels) {
  if (pred_log2.empty()) raise(Errc::empty_set, "msle_loss: empty batch");
  if (pred_log2.size() != labels.size()) raise(Errc::shape_mismatch, "msle_loss: batch size mismatch");
  std::vector<Var> squares;
  squares.reserve(pred_log2.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1)
      raise(Errc::non_positive_label, "msle_loss: label " + std::to_string(labels[i]) + " < 1");
    Var diff = ad::affine(pred_log2[i], 1.0, -std::log2(static_cast<double>(labels[i])));
    squares.push_back(ad::mul(diff, diff));
  }
  return ad::mean(ad::concat_scalars(tape, squares));
}

Var distill_loss(ad::Tape& tape, const std::vector<Var>& student_log2,
                 const std::vector<double>& teacher_log2) {
  if (student_log2.empty()) raise(Errc::empty_set, "distill_loss: empty cascade set");
  if (student_log2.size() != teacher_log2.size())
    raise(Errc::shape_mismatch, "distill_loss: prediction count mismatch");
  std::vector<Var> squares;
  squares.reserve(student_log2.size());
  for (std::size_t i = 0; i < student_log2.size(); ++i) {
    Var diff = ad::affine(student_log2[i], 1.0, -teacher_log2[i]);
    squares.push_back(ad::mul(diff, diff));
  }
  return ad::mean(ad::concat_scalars(tape, squares));
}

Var logistic_loss(ad::Tape& tape, const std::vector<Var>& logits, const std::vector<int>& labels) {
  if (logits.empty()) raise(Errc::empty_set, "logistic_loss: empty batch");
  if (logits.size() != labels.size()) raise(Errc::shape_mismatch, "logistic_loss: batch size mismatch");
  // -log sigma(l) for positives, -log(1 - sigma(l)) for negatives
  std::vector<Var> terms;
  terms.reserve(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double sign = labels[i] > 0 ? -1.0 : 1.0;
    terms.push_back(ad::softplus(ad::affine(logits[i], sign, 0.0)));
  }
  return ad::mean(ad::concat_scalars(tape, terms));
}

double msle_value(const std::vector<double>& pred_log2, const std::vector<int>& labels) {
  if (pred_log2.empty()) raise(Errc::empty_set, "msle_value: empty batch");
  if (pred_log2.size() != labels.size()) raise(Errc::shape_mismatch, "msle_value: batch size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1)
      raise(Errc::non_positive_label, "msle_value: label " + std::to_string(labels[i]) + " < 1");
    const double d = pred_log2[i] - std::log2(static_cast<double>(labels[i]));
    total += d * d;
  }
  return total / static_cast<double>(labels.size());
}

}  // namespace caslearn
