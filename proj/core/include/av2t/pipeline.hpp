#pragma once

#include "av2t/adapter.hpp"
#include "av2t/avsbench_io.hpp"
#include "av2t/common.hpp"
#include "av2t/datamodel.hpp"
#include "av2t/encoders.hpp"
#include "av2t/fusion.hpp"
#include "av2t/metrics.hpp"
#include "av2t/objectives.hpp"
#include "av2t/tensor_io.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace av2t {

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCodeVersion = "0.3.0";

struct OptimizerConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-2;
};

struct ModelConfig {
    int d_shared = 8;
    int d_hidden = 0;  // 0 means d_shared
    Activation activation = Activation::gelu;
    AdapterTap adapter_tap = AdapterTap::shared;
    std::optional<std::vector<int>> adapter_layers;  // nullopt selects every backbone layer
    int decoder_hidden = 8;

    int hidden_width() const { return d_hidden > 0 ? d_hidden : d_shared; }
};

struct TrainConfig {
    int epochs = 40;
    int max_steps = 0;  // 0 = no cap
    OptimizerConfig optimizer;
    int batch_size = 2;
    int input_resolution = 64;
    PromptSource prompt_source = PromptSource::fused;
    bool adapter_enabled = true;
    bool freeze_decoder = false;
    double threshold = 0.5;
    double beta2 = 1.0;  // F-score beta squared
    std::uint64_t seed = 0;
    int keep_every = 0;  // also keep epoch_NNNN.ckpt every k epochs; 0 keeps only last.ckpt

    void validate() const;
};

struct RunConfig {
    BackendDescriptor backend;
    ModelConfig model;
    TrainConfig train;
};

Json to_json(const RunConfig& c);
RunConfig run_config_from_json(const Json& j);

/// Stub mask decoder: prompt tokens become a per-channel bias of a 3x3
/// convolution over the last backbone layer, followed by tanh and a 1x1
/// projection to one logit per pixel.
struct DecoderHead {
    Matrix w_prompt;  // hidden x (num_tokens * token_dim)
    Vector b_prompt;  // hidden
    Matrix w_conv;    // hidden x (9 * channels), tap-major then channel
    Vector b_conv;    // hidden
    Vector w_out;     // hidden
    Vector b_out;     // 1

    static DecoderHead init(int channels, int token_width, int hidden, std::uint64_t seed);
};

/// Every tensor the training loop may update, grouped as projection.*,
/// adapters.* and decoder.*.
struct TrainableParams {
    ProjectionParams projection;
    AdapterStack adapters;
    DecoderHead decoder;

    struct View {
        std::string name;
        Eigen::Map<Matrix> value;
    };
    struct ConstView {
        std::string name;
        Eigen::Map<const Matrix> value;
    };
    std::vector<View> views();
    std::vector<ConstView> views() const;

    /// Same shapes, all zeros.
    TrainableParams zeros_like() const;
};

/// Group of a parameter name: the part before the first '.'.
std::string param_group(const std::string& name);

struct ModelState {
    RunConfig config;
    TrainableParams params;
    std::vector<std::string> frozen;
    std::uint64_t seed = 0;
    std::int64_t step = 0;

    bool is_frozen(const std::string& group) const;
};

/// Names of components whose parameters never update under `config`.
std::vector<std::string> frozen_components(const RunConfig& config);

/// Fresh model: seeded projection and decoder, zero adapters.
ModelState init_model(const RunConfig& config);

// Forward / backward -------------------------------------------------------

struct DecoderTrace {
    Vector token_flat;
    Matrix cols;    // positions x (9 * channels)
    Matrix hidden;  // positions x hidden, after tanh
    Matrix prob;    // res x res
};

struct FrameForward {
    ImageEmbedding image;
    AudioEmbedding audio;
    PromptFeature prompt;
    PromptTokens tokens;
    BackboneFeatures features;
    DecoderTrace decoder;
};

/// Runs one frame end to end at the configured resolution. Cached embeddings
/// may be passed to skip the encoders.
FrameForward forward_frame(const ModelState& state, const Backend& backend, const Frame& frame,
                           const AudioSegment& audio, const ImageEmbedding* image = nullptr,
                           const AudioEmbedding* audio_embedding = nullptr);

/// Accumulates dL/dparams into `grads` given dL/dprob at the working resolution.
void backward_frame(const ModelState& state, const Backend& backend, const FrameForward& fwd, const Matrix& d_prob,
                    TrainableParams& grads);

/// L_total over every annotated frame of `clips` (ground truth resampled to the
/// working resolution). Fills `grads` when non-null.
LossBreakdown loss_and_grad(const ModelState& state, const Backend& backend, std::span<const VideoClip> clips,
                            TrainableParams* grads);

/// Soft masks for every frame at native resolution.
MaskSet infer_clip(const VideoClip& clip, const ModelState& state, const Backend& backend);

// Optimiser ----------------------------------------------------------------

/// Adam with decoupled weight decay.
class AdamW {
  public:
    explicit AdamW(OptimizerConfig config) : config_(config) {}

    /// Updates every parameter whose group is not frozen.
    void step(TrainableParams& params, const TrainableParams& grads, const std::vector<std::string>& frozen);

    std::int64_t steps() const { return t_; }

  private:
    OptimizerConfig config_;
    std::map<std::string, Matrix> m_;
    std::map<std::string, Matrix> v_;
    std::int64_t t_ = 0;
};

// Checkpoints --------------------------------------------------------------

class CheckpointError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

void save_checkpoint(const std::filesystem::path& path, const ModelState& state);
ModelState load_checkpoint(const std::filesystem::path& path);

// Training and evaluation -------------------------------------------------

struct LossRecord {
    std::int64_t step = 0;
    LossBreakdown loss;
};

class TrainingDiverged : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct TrainResult {
    ModelState state;
    std::vector<LossRecord> curve;
    Json run_manifest;
};

/// Minimises L_total over the annotated frames of a train manifest. With an
/// output directory it writes last.ckpt every epoch, loss.csv and
/// run_manifest.json.
TrainResult train(const DatasetManifest& dataset, const RunConfig& config, const Backend& backend,
                  const std::optional<std::filesystem::path>& output_dir = std::nullopt);

/// Same, on already-loaded clips.
TrainResult train_clips(std::span<const VideoClip> clips, const RunConfig& config, const Backend& backend,
                        const std::optional<std::filesystem::path>& output_dir = std::nullopt);

std::string loss_csv(const std::vector<LossRecord>& curve);

MetricsReport evaluate_clips(std::span<const VideoClip> clips, const ModelState& state, const Backend& backend,
                             double threshold, double beta2);

/// Loads a checkpoint, infers over a fully annotated manifest and scores it.
MetricsReport evaluate_run(const std::filesystem::path& checkpoint, const DatasetManifest& dataset,
                           const Backend& backend, std::optional<double> threshold = std::nullopt,
                           std::optional<double> beta2 = std::nullopt);

/// Provenance block attached to reports and manifests.
Json provenance(const ModelState& state);

/// ISO-8601 UTC timestamp; the only field allowed to differ between identical runs.
std::string utc_timestamp();

}  // namespace av2t
