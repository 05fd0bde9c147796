#include "av2t/datamodel.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace av2t {

std::string_view to_string(Subset s) { return s == Subset::S4 ? "S4" : "MS3"; }

std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

std::string_view to_string(MaskKind k) { return k == MaskKind::binary ? "binary" : "soft"; }

Subset parse_subset(std::string_view s) {
    if (s == "S4" || s == "s4") return Subset::S4;
    if (s == "MS3" || s == "ms3") return Subset::MS3;
    throw std::invalid_argument(fmt::format("unknown subset '{}'", s));
}

Split parse_split(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw std::invalid_argument(fmt::format("unknown split '{}'", s));
}

Frame::Frame(int height, int width, std::vector<std::uint8_t> planar_rgb, int index)
    : height_(height), width_(width), index_(index), bytes_(std::move(planar_rgb)) {
    if (height <= 0 || width <= 0)
        throw std::invalid_argument(fmt::format("frame {}: non-positive size {}x{}", index, height, width));
    if (bytes_.size() != 3u * height * width)
        throw std::invalid_argument(fmt::format("frame {}: expected {} bytes for 3x{}x{}, got {}", index,
                                                3u * height * width, height, width, bytes_.size()));
}

Frame Frame::from_unit(int height, int width, std::span<const double> planar, int index) {
    std::vector<std::uint8_t> bytes(planar.size());
    std::transform(planar.begin(), planar.end(), bytes.begin(), [](double v) {
        return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    });
    return Frame(height, width, std::move(bytes), index);
}

Matrix Frame::channel(int c) const {
    Matrix m(height_, width_);
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x) m(y, x) = at(c, y, x);
    return m;
}

const Matrix* MaskSet::find(int frame_index) const {
    for (std::size_t k = 0; k < frame_indices.size() && k < masks.size(); ++k)
        if (frame_indices[k] == frame_index) return &masks[k];
    return nullptr;
}

bool first_frame_only(Subset subset, Split split) { return subset == Subset::S4 && split == Split::train; }

ValidationReport validate_clip(const VideoClip& clip) {
    ValidationReport report;
    const int t = clip.num_frames();
    const auto& id = clip.clip_id;

    if (clip.frames.size() != clip.audio.size())
        report.push_back(fmt::format("{}: length mismatch, {} frames vs {} audio segments", id,
                                     clip.frames.size(), clip.audio.size()));
    if (t == 0) report.push_back(fmt::format("{}: clip has no frames", id));

    for (int i = 0; i < t; ++i) {
        const Frame& f = clip.frames[i];
        if (f.index() != i + 1)
            report.push_back(fmt::format("{}: frame at position {} carries index {}", id, i + 1, f.index()));
        if (f.bytes().size() != 3u * f.height() * f.width())
            report.push_back(fmt::format("{}: frame {} pixel shape mismatch", id, f.index()));
    }

    for (std::size_t i = 0; i < clip.audio.size(); ++i) {
        const AudioSegment& a = clip.audio[i];
        if (a.sample_rate <= 0)
            report.push_back(fmt::format("{}: audio segment {} has sample rate {}", id, a.index, a.sample_rate));
        else if (a.samples.size() != static_cast<std::size_t>(a.sample_rate))
            report.push_back(fmt::format("{}: audio segment {} has {} samples, expected {} (1 second)", id,
                                         a.index, a.samples.size(), a.sample_rate));
        if (a.index < 1 || a.index > t || a.index != static_cast<int>(i) + 1)
            report.push_back(fmt::format("{}: audio segment at position {} pairs with frame {}", id, i + 1, a.index));
        if (std::any_of(a.samples.begin(), a.samples.end(),
                        [](float s) { return !std::isfinite(s) || s < -1.0f || s > 1.0f; }))
            report.push_back(fmt::format("{}: audio segment {} has samples outside [-1, 1]", id, a.index));
    }

    if (!clip.ground_truth) return report;
    const MaskSet& gt = *clip.ground_truth;
    if (gt.masks.size() != gt.frame_indices.size())
        report.push_back(fmt::format("{}: {} masks but {} frame indices", id, gt.masks.size(), gt.frame_indices.size()));

    for (std::size_t k = 0; k < std::min(gt.masks.size(), gt.frame_indices.size()); ++k) {
        const int fi = gt.frame_indices[k];
        const Matrix& m = gt.masks[k];
        if (fi < 1 || fi > t) {
            report.push_back(fmt::format("{}: mask references frame {} outside [1, {}]", id, fi, t));
            continue;
        }
        const Frame& f = clip.frames[fi - 1];
        if (m.rows() != f.height() || m.cols() != f.width())
            report.push_back(fmt::format("{}: mask for frame {} is {}x{}, frame is {}x{}", id, fi, m.rows(),
                                         m.cols(), f.height(), f.width()));
        const bool ok = gt.kind == MaskKind::binary
                            ? (m.array() == 0.0 || m.array() == 1.0).all()
                            : (m.array().isFinite() && m.array() >= 0.0 && m.array() <= 1.0).all();
        if (!ok)
            report.push_back(fmt::format("{}: {} mask for frame {} has out-of-range values", id, to_string(gt.kind), fi));
    }

    std::vector<int> sorted = gt.frame_indices;
    std::sort(sorted.begin(), sorted.end());
    if (first_frame_only(clip.subset, clip.split)) {
        if (sorted != std::vector<int>{1})
            report.push_back(fmt::format(
                "{}: annotation convention violated, S4/train clips annotate only frame 1 (got frames {})", id,
                sorted));
    } else {
        std::vector<int> all(t);
        std::iota(all.begin(), all.end(), 1);
        if (sorted != all)
            report.push_back(fmt::format("{}: annotation convention violated, {}/{} clips annotate all {} frames (got {})",
                                         id, to_string(clip.subset), to_string(clip.split), t, sorted));
    }
    return report;
}

}  // namespace av2t
