#pragma once

#include "av2t/avsbench_io.hpp"
#include "av2t/datamodel.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <unistd.h>

namespace av2t::test {

/// Scratch directory removed on destruction.
class TempDir {
  public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("av2t_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

  private:
    std::filesystem::path path_;
};

/// h x w binary mask from the low h*w bits of `bits`, row-major.
inline Matrix mask_from_bits(std::uint32_t bits, int h, int w) {
    Matrix m(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m(y, x) = (bits >> (y * w + x)) & 1u ? 1.0 : 0.0;
    return m;
}

struct PixelCounts {
    long tp = 0, pred = 0, gt = 0;
};

inline PixelCounts count_pixels(const Matrix& pred, const Matrix& gt) {
    PixelCounts c;
    for (Eigen::Index y = 0; y < pred.rows(); ++y)
        for (Eigen::Index x = 0; x < pred.cols(); ++x) {
            const bool p = pred(y, x) != 0.0;
            const bool g = gt(y, x) != 0.0;
            c.tp += (p && g) ? 1 : 0;
            c.pred += p ? 1 : 0;
            c.gt += g ? 1 : 0;
        }
    return c;
}

/// Nested-loop reference for frame IoU.
inline double oracle_iou(const Matrix& pred, const Matrix& gt) {
    const PixelCounts c = count_pixels(pred, gt);
    const long uni = c.pred + c.gt - c.tp;
    if (uni == 0) return 1.0;
    return static_cast<double>(c.tp) / static_cast<double>(uni);
}

/// Nested-loop reference for the F-score.
inline double oracle_fscore(const Matrix& pred, const Matrix& gt, double beta2) {
    const PixelCounts c = count_pixels(pred, gt);
    const double p = c.pred == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.pred);
    const double r = c.gt == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.gt);
    const double denom = beta2 * p + r;
    if (denom == 0.0) return 0.0;
    return (1.0 + beta2) * p * r / denom;
}

/// Central finite differences of `f` with respect to every entry of `x`.
template <class Mat>
Matrix numeric_gradient(Mat& x, const std::function<double()>& f, double step = 1e-4) {
    Matrix g(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double orig = x.data()[i];
        x.data()[i] = orig + step;
        const double up = f();
        x.data()[i] = orig - step;
        const double down = f();
        x.data()[i] = orig;
        g.data()[i] = (up - down) / (2.0 * step);
    }
    return g;
}

/// ||a - n|| / max(||a||, ||n||); 0 when both vanish.
inline double relative_error(const Matrix& analytic, const Matrix& numeric) {
    const double scale = std::max(analytic.norm(), numeric.norm());
    if (scale == 0.0) return 0.0;
    return (analytic - numeric).norm() / scale;
}

/// Builds an in-memory clip from the synthetic generator.
inline VideoClip synthetic_clip(const SyntheticConfig& cfg, int which = 0) {
    const auto specs = describe_synthetic(cfg);
    const SyntheticClipSpec& spec = specs.at(which);
    VideoClip clip;
    clip.clip_id = spec.clip_id;
    for (const auto& o : spec.objects)
        if (o.sounding) clip.category += (clip.category.empty() ? "" : "+") + o.category;
    clip.subset = cfg.subset;
    clip.split = cfg.split;
    MaskSet gt;
    for (int t = 0; t < cfg.frames; ++t) {
        clip.frames.push_back(render_frame(spec, t, cfg.height, cfg.width));
        clip.audio.push_back(render_audio(spec, t, cfg.sample_rate));
        if (t == 0 || !first_frame_only(cfg.subset, cfg.split)) {
            gt.masks.push_back(render_mask(spec, t, cfg.height, cfg.width));
            gt.frame_indices.push_back(t + 1);
        }
    }
    clip.ground_truth = std::move(gt);
    return clip;
}

}  // namespace av2t::test
