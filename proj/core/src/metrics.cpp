#include "av2t/metrics.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace av2t {
namespace {

void check_pair(const Matrix& pred, const Matrix& gt, std::string_view op) {
    if (pred.rows() != gt.rows() || pred.cols() != gt.cols())
        throw DimensionError(
            fmt::format("{}: prediction is {}x{}, ground truth is {}x{}", op, pred.rows(), pred.cols(), gt.rows(), gt.cols()));
    auto binary = [](const Matrix& m) { return (m.array() == 0.0 || m.array() == 1.0).all(); };
    if (!binary(pred) || !binary(gt)) throw std::invalid_argument(fmt::format("{}: masks must be binary", op));
}

struct Counts {
    double tp, pred, gt;
};

Counts count(const Matrix& pred, const Matrix& gt) {
    return {pred.cwiseProduct(gt).sum(), pred.sum(), gt.sum()};
}

}  // namespace

double frame_iou(const Matrix& pred, const Matrix& gt) {
    check_pair(pred, gt, "frame_iou");
    const Counts c = count(pred, gt);
    const double uni = c.pred + c.gt - c.tp;
    return uni == 0.0 ? 1.0 : c.tp / uni;
}

double frame_fscore(const Matrix& pred, const Matrix& gt, double beta2) {
    check_pair(pred, gt, "frame_fscore");
    if (beta2 < 0.0) throw std::invalid_argument("frame_fscore: beta2 must be nonnegative");
    const Counts c = count(pred, gt);
    const double precision = c.pred == 0.0 ? 1.0 : c.tp / c.pred;
    const double recall = c.gt == 0.0 ? 1.0 : c.tp / c.gt;
    const double denom = beta2 * precision + recall;
    return denom == 0.0 ? 0.0 : (1.0 + beta2) * precision * recall / denom;
}

Matrix binarize(const Matrix& soft, double threshold) {
    return (soft.array() >= threshold).cast<double>().matrix();
}

MetricsReport evaluate(std::span<const MaskSet> predictions, std::span<const VideoClip> dataset, double threshold,
                       double beta2) {
    if (predictions.size() != dataset.size())
        throw DimensionError(
            fmt::format("evaluate: {} prediction sets for {} clips", predictions.size(), dataset.size()));

    std::vector<std::string> missing;
    for (const VideoClip& clip : dataset) {
        bool full = clip.ground_truth.has_value();
        for (int i = 1; full && i <= clip.num_frames(); ++i) full = clip.ground_truth->find(i) != nullptr;
        if (!full) missing.push_back(clip.clip_id);
    }
    if (!missing.empty())
        throw std::invalid_argument(fmt::format("evaluate: clips without full ground truth: {}", fmt::join(missing, ", ")));

    MetricsReport report;
    report.threshold = threshold;
    report.beta2 = beta2;
    double iou_sum = 0.0, f_sum = 0.0;
    std::size_t frames = 0;
    for (std::size_t c = 0; c < dataset.size(); ++c) {
        const VideoClip& clip = dataset[c];
        VideoMetrics vm{clip.clip_id, {}, {}};
        for (int i = 1; i <= clip.num_frames(); ++i) {
            const Matrix* pred = predictions[c].find(i);
            if (pred == nullptr)
                throw DimensionError(fmt::format("evaluate: {} has no prediction for frame {}", clip.clip_id, i));
            const Matrix bin = binarize(*pred, threshold);
            const Matrix& gt = *clip.ground_truth->find(i);
            vm.iou.push_back(frame_iou(bin, gt));
            vm.fscore.push_back(frame_fscore(bin, gt, beta2));
            iou_sum += vm.iou.back();
            f_sum += vm.fscore.back();
            ++frames;
        }
        report.per_video.push_back(std::move(vm));
    }
    if (frames > 0) {
        report.m_j = 100.0 * iou_sum / static_cast<double>(frames);
        report.m_f = f_sum / static_cast<double>(frames);
    }
    return report;
}

Json to_json(const MetricsReport& report) {
    Json videos = Json::array();
    for (const auto& v : report.per_video) videos.push_back({{"clip_id", v.clip_id}, {"iou", v.iou}, {"fscore", v.fscore}});
    return {{"m_j", report.m_j},
            {"m_f", report.m_f},
            {"threshold", report.threshold},
            {"beta2", report.beta2},
            {"per_video", videos},
            {"provenance", report.provenance}};
}

}  // namespace av2t
