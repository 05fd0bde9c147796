#pragma once

#include "av2t/common.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace av2t {

enum class Subset { S4, MS3 };
enum class Split { train, val, test };
enum class MaskKind { binary, soft };

std::string_view to_string(Subset s);
std::string_view to_string(Split s);
std::string_view to_string(MaskKind k);
Subset parse_subset(std::string_view s);
Split parse_split(std::string_view s);

/// One RGB video frame. Intensities live on the 8-bit grid (k / 255), which is
/// what every lossless raster round-trips exactly.
class Frame {
  public:
    /// `planar_rgb` holds 3 * height * width bytes in channel-major order.
    Frame(int height, int width, std::vector<std::uint8_t> planar_rgb, int index);

    /// Builds a frame from unit-interval intensities (channel-major), rounding
    /// each value to the nearest 8-bit level.
    static Frame from_unit(int height, int width, std::span<const double> planar, int index);

    int height() const { return height_; }
    int width() const { return width_; }
    int index() const { return index_; }

    double at(int channel, int y, int x) const {
        return bytes_[(static_cast<std::size_t>(channel) * height_ + y) * width_ + x] / 255.0;
    }
    std::uint8_t byte_at(int channel, int y, int x) const {
        return bytes_[(static_cast<std::size_t>(channel) * height_ + y) * width_ + x];
    }
    std::span<const std::uint8_t> bytes() const { return bytes_; }

    /// Channel plane as a height x width matrix of unit intensities.
    Matrix channel(int c) const;

  private:
    int height_;
    int width_;
    int index_;
    std::vector<std::uint8_t> bytes_;
};

/// One second of mono audio paired with frame `index`.
struct AudioSegment {
    std::vector<float> samples;
    int sample_rate = 0;
    int index = 0;
};

/// Per-frame maps. `frame_indices[k]` is the 1-based frame that `masks[k]` annotates.
struct MaskSet {
    std::vector<Matrix> masks;
    MaskKind kind = MaskKind::binary;
    std::vector<int> frame_indices;

    std::size_t size() const { return masks.size(); }
    /// Mask for a frame index, or nullptr when that frame is unannotated.
    const Matrix* find(int frame_index) const;
};

struct VideoClip {
    std::string clip_id;
    std::string category;
    std::vector<Frame> frames;
    std::vector<AudioSegment> audio;
    std::optional<MaskSet> ground_truth;
    Subset subset = Subset::S4;
    Split split = Split::train;

    int num_frames() const { return static_cast<int>(frames.size()); }
};

/// Whether a (subset, split) pair annotates only the first frame.
bool first_frame_only(Subset subset, Split split);

using ValidationReport = std::vector<std::string>;

/// Lists every invariant violation; empty when the clip is valid.
ValidationReport validate_clip(const VideoClip& clip);

}  // namespace av2t
