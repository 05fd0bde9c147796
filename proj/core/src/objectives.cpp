#include "av2t/objectives.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace av2t {
namespace {

struct Pair {
    int frame;
    const Matrix* pred;
    const Matrix* gt;
};

std::vector<Pair> pair_frames(const MaskSet& pred, const MaskSet& gt) {
    if (gt.masks.size() != gt.frame_indices.size())
        throw DimensionError("loss: ground truth masks and frame indices differ in length");
    if (gt.masks.empty()) throw std::invalid_argument("loss: no annotated frames");
    std::vector<Pair> pairs;
    for (std::size_t k = 0; k < gt.masks.size(); ++k) {
        const int fi = gt.frame_indices[k];
        const Matrix* p = pred.find(fi);
        if (p == nullptr) throw DimensionError(fmt::format("loss: no prediction for annotated frame {}", fi));
        if (p->rows() != gt.masks[k].rows() || p->cols() != gt.masks[k].cols())
            throw DimensionError(fmt::format("loss: frame {} prediction is {}x{}, ground truth is {}x{}", fi, p->rows(),
                                             p->cols(), gt.masks[k].rows(), gt.masks[k].cols()));
        pairs.push_back({fi, p, &gt.masks[k]});
    }
    return pairs;
}

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

double bce_sum(const Matrix& p, const Matrix& g) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double q = clamp_prob(p.data()[i]);
        const double y = g.data()[i];
        s -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
    }
    return s;
}

double frame_iou_loss(const Matrix& p, const Matrix& g) {
    const double inter = p.cwiseProduct(g).sum();
    const double uni = p.sum() + g.sum() - inter;
    return 1.0 - (inter + kIouEps) / (uni + kIouEps);
}

std::size_t pixel_count(const std::vector<Pair>& pairs) {
    std::size_t n = 0;
    for (const auto& pr : pairs) n += static_cast<std::size_t>(pr.gt->size());
    return n;
}

}  // namespace

double bce_loss(const MaskSet& pred, const MaskSet& gt) {
    const auto pairs = pair_frames(pred, gt);
    const std::size_t n = pixel_count(pairs);
    if (n == 0) throw std::invalid_argument("bce_loss: annotated set has no pixels");
    double s = 0.0;
    for (const auto& pr : pairs) s += bce_sum(*pr.pred, *pr.gt);
    return s / static_cast<double>(n);
}

double iou_loss(const MaskSet& pred, const MaskSet& gt) {
    const auto pairs = pair_frames(pred, gt);
    double s = 0.0;
    for (const auto& pr : pairs) s += frame_iou_loss(*pr.pred, *pr.gt);
    return s / static_cast<double>(pairs.size());
}

LossBreakdown total_loss(const MaskSet& pred, const MaskSet& gt) {
    LossBreakdown b;
    b.bce = bce_loss(pred, gt);
    b.iou = iou_loss(pred, gt);
    b.total = b.bce + b.iou;
    return b;
}

LossGradient total_loss_with_grad(const MaskSet& pred, const MaskSet& gt) {
    const auto pairs = pair_frames(pred, gt);
    const std::size_t n = pixel_count(pairs);
    if (n == 0) throw std::invalid_argument("total_loss: annotated set has no pixels");
    const double inv_n = 1.0 / static_cast<double>(n);
    const double inv_f = 1.0 / static_cast<double>(pairs.size());

    LossGradient out;
    double bce = 0.0, iou = 0.0;
    for (const auto& pr : pairs) {
        const Matrix& p = *pr.pred;
        const Matrix& g = *pr.gt;
        bce += bce_sum(p, g);
        iou += frame_iou_loss(p, g);

        const double inter = p.cwiseProduct(g).sum() + kIouEps;
        const double uni = p.sum() + g.sum() - p.cwiseProduct(g).sum() + kIouEps;
        Matrix d(p.rows(), p.cols());
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double raw = p.data()[i];
            const double y = g.data()[i];
            double d_bce = 0.0;
            if (raw > kProbClamp && raw < 1.0 - kProbClamp) d_bce = (-y / raw + (1.0 - y) / (1.0 - raw)) * inv_n;
            const double d_iou = -(y * uni - inter * (1.0 - y)) / (uni * uni) * inv_f;
            d.data()[i] = d_bce + d_iou;
        }
        out.frame_indices.push_back(pr.frame);
        out.d_pred.push_back(std::move(d));
    }
    out.loss.bce = bce / static_cast<double>(n);
    out.loss.iou = iou / static_cast<double>(pairs.size());
    out.loss.total = out.loss.bce + out.loss.iou;
    return out;
}

}  // namespace av2t
