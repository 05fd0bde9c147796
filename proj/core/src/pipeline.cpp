#include "av2t/pipeline.hpp"

#include "av2t/image_ops.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <numeric>
#include <sstream>

namespace av2t {
namespace fs = std::filesystem;

// Config ---------------------------------------------------------------------

void TrainConfig::validate() const {
    if (epochs <= 0) throw std::invalid_argument(fmt::format("train.epochs must be positive, got {}", epochs));
    if (input_resolution <= 0)
        throw std::invalid_argument(fmt::format("train.input_resolution must be positive, got {}", input_resolution));
    if (batch_size <= 0) throw std::invalid_argument(fmt::format("train.batch_size must be positive, got {}", batch_size));
    if (max_steps < 0) throw std::invalid_argument("train.max_steps must be nonnegative");
    if (beta2 < 0.0) throw std::invalid_argument("train.beta2 must be nonnegative");
}

Json to_json(const RunConfig& c) {
    const auto& m = c.model;
    const auto& t = c.train;
    return {{"backend", to_json(c.backend)},
            {"model",
             {{"d_shared", m.d_shared},
              {"d_hidden", m.d_hidden},
              {"activation", to_string(m.activation)},
              {"adapter_tap", to_string(m.adapter_tap)},
              {"adapter_layers", m.adapter_layers ? Json(*m.adapter_layers) : Json("all")},
              {"decoder_hidden", m.decoder_hidden}}},
            {"train",
             {{"epochs", t.epochs},
              {"max_steps", t.max_steps},
              {"optimizer",
               {{"name", "adamw"},
                {"lr", t.optimizer.lr},
                {"beta1", t.optimizer.beta1},
                {"beta2", t.optimizer.beta2},
                {"eps", t.optimizer.eps},
                {"weight_decay", t.optimizer.weight_decay}}},
              {"batch_size", t.batch_size},
              {"input_resolution", t.input_resolution},
              {"prompt_source", to_string(t.prompt_source)},
              {"adapter_enabled", t.adapter_enabled},
              {"freeze_decoder", t.freeze_decoder},
              {"threshold", t.threshold},
              {"beta2", t.beta2},
              {"seed", t.seed},
              {"keep_every", t.keep_every}}}};
}

RunConfig run_config_from_json(const Json& j) {
    RunConfig c;
    c.backend = backend_from_json(j.at("backend"));
    const Json& m = j.at("model");
    c.model.d_shared = m.at("d_shared").get<int>();
    c.model.d_hidden = m.at("d_hidden").get<int>();
    c.model.activation = parse_activation(m.at("activation").get<std::string>());
    c.model.adapter_tap = parse_adapter_tap(m.at("adapter_tap").get<std::string>());
    const Json& layers = m.at("adapter_layers");
    if (layers.is_array())
        c.model.adapter_layers = layers.get<std::vector<int>>();
    else if (!(layers.is_string() && layers.get<std::string>() == "all"))
        throw std::invalid_argument("model.adapter_layers must be \"all\" or a list of layer indices");
    c.model.decoder_hidden = m.at("decoder_hidden").get<int>();

    const Json& t = j.at("train");
    c.train.epochs = t.at("epochs").get<int>();
    c.train.max_steps = t.at("max_steps").get<int>();
    const Json& o = t.at("optimizer");
    if (o.at("name").get<std::string>() != "adamw") throw std::invalid_argument("train.optimizer.name must be adamw");
    c.train.optimizer = {o.at("lr").get<double>(), o.at("beta1").get<double>(), o.at("beta2").get<double>(),
                         o.at("eps").get<double>(), o.at("weight_decay").get<double>()};
    c.train.batch_size = t.at("batch_size").get<int>();
    c.train.input_resolution = t.at("input_resolution").get<int>();
    c.train.prompt_source = parse_prompt_source(t.at("prompt_source").get<std::string>());
    c.train.adapter_enabled = t.at("adapter_enabled").get<bool>();
    c.train.freeze_decoder = t.at("freeze_decoder").get<bool>();
    c.train.threshold = t.at("threshold").get<double>();
    c.train.beta2 = t.at("beta2").get<double>();
    c.train.seed = t.at("seed").get<std::uint64_t>();
    c.train.keep_every = t.at("keep_every").get<int>();
    c.backend.validate();
    c.train.validate();
    if (c.model.d_shared <= 0 || c.model.hidden_width() <= 0 || c.model.decoder_hidden <= 0)
        throw std::invalid_argument("model dimensions must be positive");
    return c;
}

// Parameters -----------------------------------------------------------------

DecoderHead DecoderHead::init(int channels, int token_width, int hidden, std::uint64_t seed) {
    SplitMix rng(derive_seed(seed, "decoder"));
    auto uniform = [&rng](int rows, int cols) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
        Matrix m(rows, cols);
        for (int c = 0; c < cols; ++c)
            for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
        return m;
    };
    DecoderHead d;
    d.w_prompt = uniform(hidden, token_width);
    d.b_prompt = Vector::Zero(hidden);
    d.w_conv = uniform(hidden, 9 * channels);
    d.b_conv = Vector::Zero(hidden);
    d.w_out = uniform(hidden, 1);
    d.b_out = Vector::Zero(1);
    return d;
}

namespace {

template <class Params, class View, class F>
void visit_params(Params& p, F&& emit) {
    p.projection.for_each([&](const std::string& n, auto& t) { emit("projection." + n, t); });
    p.adapters.for_each([&](const std::string& n, auto& t) { emit("adapters." + n, t); });
    emit("decoder.w_prompt", p.decoder.w_prompt);
    emit("decoder.b_prompt", p.decoder.b_prompt);
    emit("decoder.w_conv", p.decoder.w_conv);
    emit("decoder.b_conv", p.decoder.b_conv);
    emit("decoder.w_out", p.decoder.w_out);
    emit("decoder.b_out", p.decoder.b_out);
}

}  // namespace

std::vector<TrainableParams::View> TrainableParams::views() {
    std::vector<View> out;
    visit_params<TrainableParams, View>(*this, [&out](const std::string& name, auto& t) {
        out.push_back({name, Eigen::Map<Matrix>(t.data(), t.rows(), t.cols())});
    });
    return out;
}

std::vector<TrainableParams::ConstView> TrainableParams::views() const {
    std::vector<ConstView> out;
    visit_params<const TrainableParams, ConstView>(*this, [&out](const std::string& name, const auto& t) {
        out.push_back({name, Eigen::Map<const Matrix>(t.data(), t.rows(), t.cols())});
    });
    return out;
}

TrainableParams TrainableParams::zeros_like() const {
    TrainableParams z = *this;
    for (auto& v : z.views()) v.value.setZero();
    return z;
}

std::string param_group(const std::string& name) { return name.substr(0, name.find('.')); }

bool ModelState::is_frozen(const std::string& group) const {
    return std::find(frozen.begin(), frozen.end(), group) != frozen.end();
}

std::vector<std::string> frozen_components(const RunConfig& config) {
    std::vector<std::string> f = {"image_encoder", "audio_encoder", "backbone_trunk", "multimodal_encoder"};
    if (!config.train.adapter_enabled) f.push_back("adapters");
    if (config.train.freeze_decoder) f.push_back("decoder");
    return f;
}

ModelState init_model(const RunConfig& config) {
    const BackendDescriptor& b = config.backend;
    const ModelConfig& m = config.model;
    const std::uint64_t seed = config.train.seed;
    ModelState s;
    s.config = config;
    s.seed = seed;
    s.params.projection =
        ProjectionParams::init(b.d_a, b.d_v, m.d_shared, m.hidden_width(), b.d_text, m.activation, seed);
    std::vector<int> layers;
    if (m.adapter_layers) {
        layers = *m.adapter_layers;
    } else {
        layers.resize(b.num_layers());
        std::iota(layers.begin(), layers.end(), 0);
    }
    const int adapter_in = m.adapter_tap == AdapterTap::shared ? m.d_shared : b.d_text;
    s.params.adapters = AdapterStack::zeros(b, layers, adapter_in, m.adapter_tap);
    s.params.decoder = DecoderHead::init(b.channels.back(), b.num_tokens * b.token_dim, m.decoder_hidden, seed);
    s.frozen = frozen_components(config);
    return s;
}

// Forward / backward -----------------------------------------------------------

namespace {

Matrix im2col3x3(const Matrix& features, int res) {
    const Eigen::Index ch = features.cols();
    Matrix cols = Matrix::Zero(static_cast<Eigen::Index>(res) * res, 9 * ch);
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x) {
            const Eigen::Index p = static_cast<Eigen::Index>(y) * res + x;
            for (int k = 0; k < 9; ++k) {
                const int sy = y + k / 3 - 1;
                const int sx = x + k % 3 - 1;
                if (sy < 0 || sy >= res || sx < 0 || sx >= res) continue;
                cols.block(p, k * ch, 1, ch) = features.row(static_cast<Eigen::Index>(sy) * res + sx);
            }
        }
    return cols;
}

Matrix col2im3x3(const Matrix& d_cols, int res, Eigen::Index ch) {
    Matrix d = Matrix::Zero(static_cast<Eigen::Index>(res) * res, ch);
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x) {
            const Eigen::Index p = static_cast<Eigen::Index>(y) * res + x;
            for (int k = 0; k < 9; ++k) {
                const int sy = y + k / 3 - 1;
                const int sx = x + k % 3 - 1;
                if (sy < 0 || sy >= res || sx < 0 || sx >= res) continue;
                d.row(static_cast<Eigen::Index>(sy) * res + sx) += d_cols.block(p, k * ch, 1, ch);
            }
        }
    return d;
}

Vector flatten_tokens(const PromptTokens& t) {
    Vector v(t.tokens.size());
    for (Eigen::Index k = 0; k < t.tokens.rows(); ++k) v.segment(k * t.tokens.cols(), t.tokens.cols()) = t.tokens.row(k).transpose();
    return v;
}

DecoderTrace decode(const DecoderHead& head, const Matrix& features, int res, const PromptTokens& tokens) {
    DecoderTrace tr;
    tr.token_flat = flatten_tokens(tokens);
    if (tr.token_flat.size() != head.w_prompt.cols())
        throw DimensionError(fmt::format("decoder: {} prompt token values, head expects {}", tr.token_flat.size(),
                                         head.w_prompt.cols()));
    if (9 * features.cols() != head.w_conv.cols())
        throw DimensionError(fmt::format("decoder: backbone has {} channels, head expects {}", features.cols(),
                                         head.w_conv.cols() / 9));
    const Vector g = head.w_prompt * tr.token_flat + head.b_prompt + head.b_conv;
    tr.cols = im2col3x3(features, res);
    Matrix pre = tr.cols * head.w_conv.transpose();
    pre.rowwise() += g.transpose();
    tr.hidden = pre.array().tanh();
    const Vector logits = (tr.hidden * head.w_out).array() + head.b_out(0);
    tr.prob.resize(res, res);
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x) tr.prob(y, x) = 1.0 / (1.0 + std::exp(-logits(static_cast<Eigen::Index>(y) * res + x)));
    return tr;
}

}  // namespace

FrameForward forward_frame(const ModelState& state, const Backend& backend, const Frame& frame,
                           const AudioSegment& audio, const ImageEmbedding* image,
                           const AudioEmbedding* audio_embedding) {
    const RunConfig& cfg = state.config;
    const int res = cfg.train.input_resolution;
    FrameForward f;
    f.image = image != nullptr ? *image : backend.encode_image(frame);
    f.audio = audio_embedding != nullptr ? *audio_embedding : backend.encode_audio(audio);
    f.prompt = build_prompt(f.audio, f.image, state.params.projection, cfg.train.prompt_source);
    f.tokens = backend.encode_multimodal_prompt(f.prompt.text_space, f.image);
    const std::span<const Frame> one(&frame, 1);
    if (cfg.train.adapter_enabled)
        f.features = inject(one, f.prompt, state.params.adapters, backend, res);
    else
        f.features = backend.encode_backbone(one, res);
    f.decoder = decode(state.params.decoder, f.features.layer_outputs.back(), res, f.tokens);
    return f;
}

void backward_frame(const ModelState& state, const Backend& backend, const FrameForward& fwd, const Matrix& d_prob,
                    TrainableParams& grads) {
    const RunConfig& cfg = state.config;
    const int res = cfg.train.input_resolution;
    const DecoderHead& head = state.params.decoder;
    const DecoderTrace& tr = fwd.decoder;
    const Eigen::Index positions = static_cast<Eigen::Index>(res) * res;

    Vector d_logit(positions);
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x) {
            const double p = tr.prob(y, x);
            d_logit(static_cast<Eigen::Index>(y) * res + x) = d_prob(y, x) * p * (1.0 - p);
        }
    grads.decoder.w_out += tr.hidden.transpose() * d_logit;
    grads.decoder.b_out(0) += d_logit.sum();
    const Matrix d_pre = (d_logit * head.w_out.transpose()).array() * (1.0 - tr.hidden.array().square());
    const Vector d_g = d_pre.colwise().sum().transpose();
    grads.decoder.b_conv += d_g;
    grads.decoder.w_conv += d_pre.transpose() * tr.cols;
    grads.decoder.b_prompt += d_g;
    grads.decoder.w_prompt += d_g * tr.token_flat.transpose();

    const Vector d_token_flat = head.w_prompt.transpose() * d_g;
    Matrix d_tokens(fwd.tokens.tokens.rows(), fwd.tokens.tokens.cols());
    for (Eigen::Index k = 0; k < d_tokens.rows(); ++k)
        d_tokens.row(k) = d_token_flat.segment(k * d_tokens.cols(), d_tokens.cols()).transpose();
    Vector d_text = backend.multimodal_backward(fwd.tokens, d_tokens);

    Vector d_shared;
    if (cfg.train.adapter_enabled && !state.params.adapters.layer_selection.empty()) {
        const Matrix d_features = col2im3x3(d_pre * head.w_conv, res, fwd.features.layer_outputs.back().cols());
        const auto d_layers = backend.backbone_backward(fwd.features, d_features);
        const Vector d_adapter_in = adapter_backward(fwd.prompt, d_layers, state.params.adapters, grads.adapters);
        if (state.params.adapters.tap == AdapterTap::shared)
            d_shared = d_adapter_in;
        else
            d_text += d_adapter_in;
    }
    build_prompt_backward(fwd.prompt, fwd.audio, fwd.image, state.params.projection, d_text, d_shared,
                          grads.projection);
}

namespace {

struct Sample {
    const Frame* frame;
    const AudioSegment* audio;
    ImageEmbedding image;
    AudioEmbedding audio_embedding;
    Matrix gt;  // at working resolution
    std::string clip_id;
};

std::vector<Sample> annotated_samples(const VideoClip& clip, const Backend& backend, int res) {
    std::vector<Sample> out;
    if (!clip.ground_truth) return out;
    const MaskSet& gt = *clip.ground_truth;
    for (std::size_t k = 0; k < gt.masks.size(); ++k) {
        const int fi = gt.frame_indices[k];
        const Frame& f = clip.frames.at(fi - 1);
        const AudioSegment& a = clip.audio.at(fi - 1);
        out.push_back({&f, &a, backend.encode_image(f), backend.encode_audio(a), resize_nearest(gt.masks[k], res, res),
                       clip.clip_id});
    }
    return out;
}

LossBreakdown batch_loss(const ModelState& state, const Backend& backend, const std::vector<const Sample*>& batch,
                         TrainableParams* grads, std::vector<FrameForward>* keep = nullptr) {
    MaskSet pred, gt;
    pred.kind = MaskKind::soft;
    std::vector<FrameForward> fwds;
    fwds.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Sample& s = *batch[i];
        fwds.push_back(forward_frame(state, backend, *s.frame, *s.audio, &s.image, &s.audio_embedding));
        pred.masks.push_back(fwds.back().decoder.prob);
        pred.frame_indices.push_back(static_cast<int>(i) + 1);
        gt.masks.push_back(s.gt);
        gt.frame_indices.push_back(static_cast<int>(i) + 1);
    }
    const LossGradient lg = total_loss_with_grad(pred, gt);
    if (grads != nullptr && std::isfinite(lg.loss.total))
        for (std::size_t i = 0; i < batch.size(); ++i) backward_frame(state, backend, fwds[i], lg.d_pred[i], *grads);
    if (keep != nullptr) *keep = std::move(fwds);
    return lg.loss;
}

}  // namespace

LossBreakdown loss_and_grad(const ModelState& state, const Backend& backend, std::span<const VideoClip> clips,
                            TrainableParams* grads) {
    std::vector<Sample> samples;
    for (const VideoClip& c : clips) {
        auto s = annotated_samples(c, backend, state.config.train.input_resolution);
        samples.insert(samples.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    }
    std::vector<const Sample*> batch;
    for (const auto& s : samples) batch.push_back(&s);
    return batch_loss(state, backend, batch, grads);
}

MaskSet infer_clip(const VideoClip& clip, const ModelState& state, const Backend& backend) {
    if (clip.frames.size() != clip.audio.size())
        throw DimensionError(fmt::format("infer_clip: {} has {} frames and {} audio segments", clip.clip_id,
                                         clip.frames.size(), clip.audio.size()));
    MaskSet out;
    out.kind = MaskKind::soft;
    for (std::size_t i = 0; i < clip.frames.size(); ++i) {
        const Frame& f = clip.frames[i];
        const FrameForward fwd = forward_frame(state, backend, f, clip.audio[i]);
        Matrix m = resize_image(fwd.decoder.prob, f.height(), f.width());
        out.masks.push_back(m.cwiseMax(0.0).cwiseMin(1.0));
        out.frame_indices.push_back(f.index());
    }
    return out;
}

// Optimiser ------------------------------------------------------------------

void AdamW::step(TrainableParams& params, const TrainableParams& grads, const std::vector<std::string>& frozen) {
    ++t_;
    const auto& c = config_;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t_));
    const auto gviews = grads.views();
    auto pviews = params.views();
    for (std::size_t i = 0; i < pviews.size(); ++i) {
        auto& p = pviews[i];
        if (std::find(frozen.begin(), frozen.end(), param_group(p.name)) != frozen.end()) continue;
        const auto& g = gviews[i].value;
        auto [mit, mnew] = m_.try_emplace(p.name, Matrix::Zero(p.value.rows(), p.value.cols()));
        auto [vit, vnew] = v_.try_emplace(p.name, Matrix::Zero(p.value.rows(), p.value.cols()));
        Matrix& m = mit->second;
        Matrix& v = vit->second;
        m = c.beta1 * m + (1.0 - c.beta1) * g;
        v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
        p.value *= (1.0 - c.lr * c.weight_decay);
        p.value.array() -= c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
    }
}

// Checkpoints ----------------------------------------------------------------

void save_checkpoint(const fs::path& path, const ModelState& state) {
    TensorMap tensors;
    for (const auto& v : state.params.views()) tensors.emplace(v.name, Matrix(v.value));
    const Json meta = {{"format", "av2t-checkpoint"},
                       {"format_version", kCheckpointVersion},
                       {"code_version", kCodeVersion},
                       {"seed", state.seed},
                       {"step", state.step},
                       {"frozen", state.frozen},
                       {"config", to_json(state.config)}};
    write_container(path, meta, tensors);
}

ModelState load_checkpoint(const fs::path& path) {
    Container c;
    try {
        c = read_container(path);
    } catch (const FormatError& e) {
        throw CheckpointError(fmt::format("cannot load checkpoint: {}", e.what()));
    }
    const Json& meta = c.meta;
    if (meta.value("format", "") != "av2t-checkpoint")
        throw CheckpointError(fmt::format("{}: not a checkpoint", path.string()));
    const int version = meta.at("format_version").get<int>();
    if (version != kCheckpointVersion)
        throw CheckpointError(fmt::format("{}: checkpoint format version {} unsupported (expected {})", path.string(),
                                          version, kCheckpointVersion));
    ModelState s = init_model(run_config_from_json(meta.at("config")));
    s.seed = meta.at("seed").get<std::uint64_t>();
    s.step = meta.at("step").get<std::int64_t>();
    s.frozen = meta.at("frozen").get<std::vector<std::string>>();
    for (auto& v : s.params.views()) {
        const auto it = c.tensors.find(v.name);
        if (it == c.tensors.end()) throw CheckpointError(fmt::format("{}: missing tensor '{}'", path.string(), v.name));
        if (it->second.rows() != v.value.rows() || it->second.cols() != v.value.cols())
            throw CheckpointError(fmt::format("{}: tensor '{}' has shape {}x{}, expected {}x{}", path.string(), v.name,
                                              it->second.rows(), it->second.cols(), v.value.rows(), v.value.cols()));
        v.value = it->second;
    }
    return s;
}

// Training -------------------------------------------------------------------

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Json provenance(const ModelState& state) {
    return {{"code_version", kCodeVersion},
            {"seed", state.seed},
            {"step", state.step},
            {"prompt_source", to_string(state.config.train.prompt_source)},
            {"adapter_enabled", state.config.train.adapter_enabled},
            {"backend", state.config.backend.name},
            {"backend_kind", to_string(state.config.backend.kind)},
            {"config", to_json(state.config)}};
}

std::string loss_csv(const std::vector<LossRecord>& curve) {
    std::string out = "step,bce,iou,total\n";
    for (const auto& r : curve) out += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", r.step, r.loss.bce, r.loss.iou, r.loss.total);
    return out;
}

namespace {

Json frozen_checksums(const Backend& backend) {
    Json j = Json::object();
    for (const char* c : {"image_encoder", "audio_encoder", "backbone_trunk", "multimodal_encoder"})
        j[c] = hex64(backend.checksum(c));
    return j;
}

}  // namespace

TrainResult train(const DatasetManifest& dataset, const RunConfig& config, const Backend& backend,
                  const std::optional<fs::path>& output_dir) {
    if (dataset.split != Split::train)
        throw std::invalid_argument(fmt::format("train: manifest split is {}, expected train", to_string(dataset.split)));
    const auto clips = load_all(dataset);
    return train_clips(clips, config, backend, output_dir);
}

TrainResult train_clips(std::span<const VideoClip> clips, const RunConfig& config, const Backend& backend,
                        const std::optional<fs::path>& output_dir) {
    config.train.validate();
    if (clips.empty()) throw std::invalid_argument("train: no clips");
    for (const VideoClip& c : clips) {
        const auto report = validate_clip(c);
        if (!report.empty()) throw std::invalid_argument(fmt::format("train: invalid clip: {}", fmt::join(report, "; ")));
        if (!c.ground_truth) throw std::invalid_argument(fmt::format("train: clip {} has no ground truth", c.clip_id));
    }
    if (backend.descriptor().name != config.backend.name || backend.descriptor().kind != config.backend.kind)
        throw std::invalid_argument("train: backend does not match the run config");

    TrainResult result;
    ModelState& state = result.state;
    state = init_model(config);
    const TrainConfig& tc = config.train;
    const Json before = frozen_checksums(backend);

    std::vector<std::vector<Sample>> per_clip;
    for (const VideoClip& c : clips) per_clip.push_back(annotated_samples(c, backend, tc.input_resolution));

    AdamW opt(tc.optimizer);
    std::vector<std::size_t> order(clips.size());
    bool done = false;
    for (int epoch = 0; epoch < tc.epochs && !done; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        SplitMix rng(derive_seed(state.seed, fmt::format("order/{}", epoch)));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

        for (std::size_t b = 0; b < order.size() && !done; b += tc.batch_size) {
            std::vector<const Sample*> batch;
            for (std::size_t k = b; k < std::min(order.size(), b + tc.batch_size); ++k)
                for (const Sample& s : per_clip[order[k]]) batch.push_back(&s);
            TrainableParams grads = state.params.zeros_like();
            LossBreakdown loss;
            std::string fault;
            try {
                loss = batch_loss(state, backend, batch, &grads);
            } catch (const std::domain_error& e) {
                // non-finite parameters surface as a rejected intermediate
                fault = e.what();
                loss.bce = loss.iou = loss.total = std::numeric_limits<double>::quiet_NaN();
            }
            if (!std::isfinite(loss.total)) {
                Json dump = {{"step", state.step},
                             {"epoch", epoch},
                             {"loss", {{"bce", std::to_string(loss.bce)}, {"iou", std::to_string(loss.iou)},
                                       {"total", std::to_string(loss.total)}}},
                             {"batch", Json::array()}};
                if (!fault.empty()) dump["fault"] = fault;
                for (const Sample* s : batch) dump["batch"].push_back({{"clip_id", s->clip_id}, {"frame", s->frame->index()}});
                if (output_dir) write_text_file(*output_dir / "nan_dump.json", dump.dump(2) + "\n");
                throw TrainingDiverged(fmt::format("non-finite loss at step {}: {}", state.step, dump["batch"].dump()));
            }
            opt.step(state.params, grads, state.frozen);
            ++state.step;
            result.curve.push_back({state.step, loss});
            if (tc.max_steps > 0 && state.step >= tc.max_steps) done = true;
        }
        if (output_dir) {
            save_checkpoint(*output_dir / "last.ckpt", state);
            if (tc.keep_every > 0 && (epoch + 1) % tc.keep_every == 0)
                save_checkpoint(*output_dir / fmt::format("epoch_{:04d}.ckpt", epoch + 1), state);
        }
    }

    Json curve = Json::array();
    for (const auto& r : result.curve)
        curve.push_back({{"step", r.step}, {"bce", r.loss.bce}, {"iou", r.loss.iou}, {"total", r.loss.total}});
    result.run_manifest = {{"command", "train"},
                           {"code_version", kCodeVersion},
                           {"seed", state.seed},
                           {"steps", state.step},
                           {"clips", clips.size()},
                           {"frozen", state.frozen},
                           {"frozen_checksums", {{"before", before}, {"after", frozen_checksums(backend)}}},
                           {"config", to_json(config)},
                           {"loss_curve", curve},
                           {"created_at", utc_timestamp()}};
    if (output_dir) {
        write_text_file(*output_dir / "loss.csv", loss_csv(result.curve));
        write_text_file(*output_dir / "run_manifest.json", result.run_manifest.dump(2) + "\n");
    }
    return result;
}

MetricsReport evaluate_clips(std::span<const VideoClip> clips, const ModelState& state, const Backend& backend,
                             double threshold, double beta2) {
    std::vector<MaskSet> preds;
    preds.reserve(clips.size());
    for (const VideoClip& c : clips) preds.push_back(infer_clip(c, state, backend));
    MetricsReport r = evaluate(preds, clips, threshold, beta2);
    r.provenance = provenance(state);
    return r;
}

MetricsReport evaluate_run(const fs::path& checkpoint, const DatasetManifest& dataset, const Backend& backend,
                           std::optional<double> threshold, std::optional<double> beta2) {
    const ModelState state = load_checkpoint(checkpoint);
    const auto clips = load_all(dataset);
    MetricsReport r = evaluate_clips(clips, state, backend, threshold.value_or(state.config.train.threshold),
                                     beta2.value_or(state.config.train.beta2));
    r.provenance["checkpoint"] = checkpoint.string();
    r.provenance["dataset"] = {{"root", dataset.root},
                               {"subset", to_string(dataset.subset)},
                               {"split", to_string(dataset.split)},
                               {"clips", dataset.entries.size()}};
    return r;
}

}  // namespace av2t
