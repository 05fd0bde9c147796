#pragma once

#include "av2t/common.hpp"
#include "av2t/datamodel.hpp"
#include "av2t/tensor_io.hpp"

#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace av2t {

enum class BackendKind { stub, pretrained };

std::string_view to_string(BackendKind k);
BackendKind parse_backend_kind(std::string_view s);

/// Dimensions and provenance of an encoder suite.
///
/// The backbone has `channels.size()` layers. Layer j holds X_j, the output of
/// block j plus the injected prompt P_j; block 0 consumes pixels.
struct BackendDescriptor {
    std::string name = "stub";
    BackendKind kind = BackendKind::stub;
    int d_v = 16;
    int d_a = 12;
    int d_text = 8;
    std::vector<int> channels = {8, 8, 8};
    int num_tokens = 2;
    int token_dim = 8;
    int image_grid = 8;   // image encoder samples the frame on this square grid
    int audio_bins = 16;  // spectral bins seen by the audio encoder
    bool linear_blocks = false;
    std::uint64_t seed = 1234;
    std::string asset_dir;  // pretrained weight root; AV2T_BACKEND_DIR wins when set

    int num_layers() const { return static_cast<int>(channels.size()); }
    void validate() const;

    static BackendDescriptor stub_defaults();
    static BackendDescriptor pretrained_defaults();
};

Json to_json(const BackendDescriptor& d);
BackendDescriptor backend_from_json(const Json& j);

struct ImageEmbedding {
    Vector vector;
};

struct AudioEmbedding {
    Vector vector;
};

/// Token sequence handed to the mask decoder, num_tokens x token_dim.
struct PromptTokens {
    Matrix tokens;
};

/// Per-layer spatial features. Rows index (frame, position) as t * positions + p.
struct BackboneFeatures {
    int frames = 0;
    int height = 0;
    int width = 0;
    std::vector<Matrix> layer_outputs;  // X_j = block_j(X_{j-1}) + P_j
    std::vector<Matrix> block_outputs;  // block_j(X_{j-1}) before injection
    std::vector<Matrix> block_inputs;   // block_j pre-activation

    int positions() const { return height * width; }
    int num_layers() const { return static_cast<int>(layer_outputs.size()); }
};

class BackendUnavailable : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Frozen encoder suite: image encoder, audio encoder, segmentation backbone
/// trunk and multimodal prompt encoder.
///
/// Stub weights are drawn from the descriptor seed at construction. Pretrained
/// weights load lazily on first use and a missing asset raises
/// BackendUnavailable naming the path; there is no fallback to the stub.
class Backend {
  public:
    explicit Backend(BackendDescriptor desc);

    Backend(const Backend&) = delete;
    Backend& operator=(const Backend&) = delete;

    const BackendDescriptor& descriptor() const { return desc_; }

    ImageEmbedding encode_image(const Frame& frame) const;
    AudioEmbedding encode_audio(const AudioSegment& segment) const;

    /// Runs the trunk on frames resampled to resolution x resolution. When
    /// `prompts` is given it must hold one (T * res^2) x C_j tensor per layer.
    BackboneFeatures encode_backbone(std::span<const Frame> frames, int resolution,
                                     const std::vector<Matrix>* prompts = nullptr) const;

    /// Backpropagates dL/dX_last through the frozen trunk. Entry j of the result
    /// is dL/dX_j, which equals dL/dP_j.
    std::vector<Matrix> backbone_backward(const BackboneFeatures& features, const Matrix& d_last) const;

    PromptTokens encode_multimodal_prompt(const Vector& text, const Frame& frame) const;
    PromptTokens encode_multimodal_prompt(const Vector& text, const ImageEmbedding& frame_embedding) const;

    /// dL/dtext given dL/dtokens at a forward result.
    Vector multimodal_backward(const PromptTokens& forward, const Matrix& d_tokens) const;

    /// Checksum of one frozen component: image_encoder, audio_encoder,
    /// backbone_trunk or multimodal_encoder.
    std::uint64_t checksum(std::string_view component) const;

    const TensorMap& weights() const;

    /// Writes <root>/<name>/weights.av2t so the suite can be reloaded as a
    /// pretrained backend.
    void export_assets(const std::filesystem::path& root) const;

  private:
    void ensure_loaded() const;
    const Matrix& w(const std::string& name) const;
    Matrix pixels_at(const Frame& frame, int resolution) const;

    BackendDescriptor desc_;
    mutable std::once_flag loaded_;
    mutable TensorMap weights_;
};

/// Weight root for a pretrained descriptor, honouring AV2T_BACKEND_DIR.
std::filesystem::path resolve_asset_root(const BackendDescriptor& desc);
std::filesystem::path asset_file(const BackendDescriptor& desc);

/// Free-function forms of the backend contract.
ImageEmbedding encode_image(const Frame& frame, const Backend& backend);
AudioEmbedding encode_audio(const AudioSegment& segment, const Backend& backend);
BackboneFeatures encode_backbone(std::span<const Frame> frames, const std::vector<Matrix>* prompts,
                                 const Backend& backend, int resolution);
PromptTokens encode_multimodal_prompt(const Vector& text, const Frame& frame, const Backend& backend);

}  // namespace av2t
