// losses.hpp
//   Training objectives. All three take projected/predicted values as tape
//   variables so gradients flow through the full pipeline; labels and
//   teacher outputs enter as constants.

#pragma once

#include <vector>

#include "caslearn/tensor.hpp"

namespace caslearn {

// Temperature-scaled contrastive loss over 2B projected views ordered as
// pairs (0,1), (2,3), ...; for each anchor the partner is the positive and
// the other 2B-2 views are negatives; the result is the mean over all 2B
// anchors. Exactly zero when B = 1.
ad::Var nt_xent_loss(ad::Tape& tape, const std::vector<ad::Var>& views, double temperature);

// Mean squared error in log2 space; predictions are already log2 values,
// labels are raw popularities (>= 1).
ad::Var msle_loss(ad::Tape& tape, const std::vector<ad::Var>& pred_log2, const std::vector<int>& labels);

// Teacher-student match over labeled + unlabeled cascades; teacher outputs
// are frozen constants.
ad::Var distill_loss(ad::Tape& tape, const std::vector<ad::Var>& student_log2,
                     const std::vector<double>& teacher_log2);

// Binary cross-entropy on a single logit, used by the outbreak task.
ad::Var logistic_loss(ad::Tape& tape, const std::vector<ad::Var>& logits, const std::vector<int>& labels);

// Plain-value MSLE for evaluation.
double msle_value(const std::vector<double>& pred_log2, const std::vector<int>& labels);

}  // namespace caslearn
