#pragma once

#include "av2t/common.hpp"
#include "av2t/datamodel.hpp"

#include <vector>

namespace av2t {

/// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] inside the BCE logs.
inline constexpr double kProbClamp = 1e-7;
/// Smoothing term of the soft IoU ratio.
inline constexpr double kIouEps = 1e-6;

struct LossBreakdown {
    double bce = 0.0;
    double iou = 0.0;
    double total = 0.0;
};

/// Losses pair each ground-truth mask with the prediction for the same frame
/// index; frames without ground truth do not contribute. Shape mismatches and
/// missing predictions raise DimensionError.

/// Mean binary cross-entropy over every annotated pixel.
double bce_loss(const MaskSet& pred, const MaskSet& gt);

/// Soft IoU loss 1 - (sum p*g + eps) / (sum p + sum g - sum p*g + eps), per
/// annotated frame, averaged over frames.
double iou_loss(const MaskSet& pred, const MaskSet& gt);

/// bce + iou with no weighting.
LossBreakdown total_loss(const MaskSet& pred, const MaskSet& gt);

struct LossGradient {
    LossBreakdown loss;
    std::vector<int> frame_indices;  // same order as gt.frame_indices
    std::vector<Matrix> d_pred;      // dL_total / dp for each of those frames
};

LossGradient total_loss_with_grad(const MaskSet& pred, const MaskSet& gt);

}  // namespace av2t
