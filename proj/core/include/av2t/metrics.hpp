#pragma once

#include "av2t/common.hpp"
#include "av2t/datamodel.hpp"
#include "av2t/tensor_io.hpp"

#include <span>
#include <string>
#include <vector>

namespace av2t {

struct VideoMetrics {
    std::string clip_id;
    std::vector<double> iou;
    std::vector<double> fscore;
};

struct MetricsReport {
    double m_j = 0.0;  // mean IoU x 100
    double m_f = 0.0;  // mean F-score in [0, 1]
    std::vector<VideoMetrics> per_video;
    double threshold = 0.5;
    double beta2 = 1.0;
    Json provenance = Json::object();
};

/// |pred ∩ gt| / |pred ∪ gt| on {0, 1} maps; 1.0 when both are empty.
double frame_iou(const Matrix& pred, const Matrix& gt);

/// (1 + beta2) P R / (beta2 P + R). P is 1 for an empty prediction, R is 1 for
/// an empty ground truth, and the score is 0 when the denominator vanishes.
double frame_fscore(const Matrix& pred, const Matrix& gt, double beta2 = 1.0);

/// 1 where soft >= threshold, else 0.
Matrix binarize(const Matrix& soft, double threshold);

/// Scores predictions[i] against dataset[i] over every frame. Every clip must
/// carry ground truth for all of its frames.
MetricsReport evaluate(std::span<const MaskSet> predictions, std::span<const VideoClip> dataset, double threshold = 0.5,
                       double beta2 = 1.0);

Json to_json(const MetricsReport& report);

}  // namespace av2t
