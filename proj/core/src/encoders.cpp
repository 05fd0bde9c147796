#include "av2t/encoders.hpp"

#include "av2t/image_ops.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

namespace av2t {
namespace {

constexpr double kZeroNorm = 1e-12;

Matrix gaussian(std::uint64_t seed, std::string_view label, Eigen::Index rows, Eigen::Index cols, double scale) {
    SplitMix rng(derive_seed(seed, label));
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = scale * rng.normal();
    return m;
}

Vector unit(const Vector& v) { return v / v.norm(); }

std::string block_weight(int j) { return fmt::format("backbone.block{}.weight", j); }
std::string block_bias(int j) { return fmt::format("backbone.block{}.bias", j); }

TensorMap generate_stub_weights(const BackendDescriptor& d) {
    TensorMap w;
    const int image_in = 3 * d.image_grid * d.image_grid;
    w["image_encoder.proj"] = gaussian(d.seed, "image.proj", d.d_v, image_in, 2.0 / std::sqrt(image_in));
    w["image_encoder.reserved"] = gaussian(d.seed, "image.reserved", d.d_v, 1, 1.0).normalized();
    w["audio_encoder.proj"] = gaussian(d.seed, "audio.proj", d.d_a, d.audio_bins, 1.5 / std::sqrt(d.audio_bins));
    w["audio_encoder.reserved"] = gaussian(d.seed, "audio.reserved", d.d_a, 1, 1.0).normalized();
    int in = 3;
    for (int j = 0; j < d.num_layers(); ++j) {
        const int out = d.channels[j];
        w[block_weight(j)] = gaussian(d.seed, block_weight(j), in, out, 1.5 / std::sqrt(in));
        w[block_bias(j)] = gaussian(d.seed, block_bias(j), 1, out, 0.2);
        in = out;
    }
    const int tok = d.num_tokens * d.token_dim;
    w["multimodal.text_proj"] = gaussian(d.seed, "mm.text", tok, d.d_text, 1.0 / std::sqrt(d.d_text));
    w["multimodal.frame_proj"] = gaussian(d.seed, "mm.frame", tok, d.d_v, 0.5 / std::sqrt(d.d_v));
    w["multimodal.bias"] = gaussian(d.seed, "mm.bias", tok, 1, 0.1);
    return w;
}

void check_shape(const TensorMap& w, const std::string& name, Eigen::Index rows, Eigen::Index cols,
                 const std::filesystem::path& file) {
    auto it = w.find(name);
    if (it == w.end()) throw BackendUnavailable(fmt::format("{}: missing tensor '{}'", file.string(), name));
    if (it->second.rows() != rows || it->second.cols() != cols)
        throw BackendUnavailable(fmt::format("{}: tensor '{}' is {}x{}, descriptor expects {}x{}", file.string(), name,
                                             it->second.rows(), it->second.cols(), rows, cols));
}

}  // namespace

std::string_view to_string(BackendKind k) { return k == BackendKind::stub ? "stub" : "pretrained"; }

BackendKind parse_backend_kind(std::string_view s) {
    if (s == "stub") return BackendKind::stub;
    if (s == "pretrained") return BackendKind::pretrained;
    throw std::invalid_argument(fmt::format("unknown backend kind '{}'", s));
}

void BackendDescriptor::validate() const {
    auto positive = [this](int v, std::string_view what) {
        if (v <= 0) throw DimensionError(fmt::format("backend '{}': {} must be positive, got {}", name, what, v));
    };
    positive(d_v, "d_v");
    positive(d_a, "d_a");
    positive(d_text, "d_text");
    positive(num_tokens, "num_tokens");
    positive(token_dim, "token_dim");
    positive(image_grid, "image_grid");
    positive(audio_bins, "audio_bins");
    positive(num_layers(), "num_layers");
    for (int c : channels) positive(c, "channel count");
}

BackendDescriptor BackendDescriptor::stub_defaults() { return BackendDescriptor{}; }

BackendDescriptor BackendDescriptor::pretrained_defaults() {
    BackendDescriptor d;
    d.name = "evf-sam2";
    d.kind = BackendKind::pretrained;
    d.d_v = 768;
    d.d_a = 512;
    d.d_text = 1024;
    d.channels = {144, 288, 576, 1152};
    d.num_tokens = 1;
    d.token_dim = 256;
    d.image_grid = 16;
    d.audio_bins = 64;
    return d;
}

Json to_json(const BackendDescriptor& d) {
    return {{"name", d.name},
            {"kind", to_string(d.kind)},
            {"d_v", d.d_v},
            {"d_a", d.d_a},
            {"d_text", d.d_text},
            {"channels", d.channels},
            {"num_tokens", d.num_tokens},
            {"token_dim", d.token_dim},
            {"image_grid", d.image_grid},
            {"audio_bins", d.audio_bins},
            {"linear_blocks", d.linear_blocks},
            {"seed", d.seed},
            {"asset_dir", d.asset_dir}};
}

BackendDescriptor backend_from_json(const Json& j) {
    BackendDescriptor d;
    d.name = j.at("name").get<std::string>();
    d.kind = parse_backend_kind(j.at("kind").get<std::string>());
    d.d_v = j.at("d_v").get<int>();
    d.d_a = j.at("d_a").get<int>();
    d.d_text = j.at("d_text").get<int>();
    d.channels = j.at("channels").get<std::vector<int>>();
    d.num_tokens = j.at("num_tokens").get<int>();
    d.token_dim = j.at("token_dim").get<int>();
    d.image_grid = j.at("image_grid").get<int>();
    d.audio_bins = j.at("audio_bins").get<int>();
    d.linear_blocks = j.at("linear_blocks").get<bool>();
    d.seed = j.at("seed").get<std::uint64_t>();
    d.asset_dir = j.at("asset_dir").get<std::string>();
    return d;
}

std::filesystem::path resolve_asset_root(const BackendDescriptor& desc) {
    if (const char* env = std::getenv("AV2T_BACKEND_DIR"); env != nullptr && *env != '\0') return env;
    return desc.asset_dir;
}

std::filesystem::path asset_file(const BackendDescriptor& desc) {
    return resolve_asset_root(desc) / desc.name / "weights.av2t";
}

Backend::Backend(BackendDescriptor desc) : desc_(std::move(desc)) {
    desc_.validate();
    if (desc_.kind == BackendKind::stub) ensure_loaded();
}

void Backend::ensure_loaded() const {
    std::call_once(loaded_, [this] {
        if (desc_.kind == BackendKind::stub) {
            weights_ = generate_stub_weights(desc_);
            return;
        }
        const auto file = asset_file(desc_);
        if (!std::filesystem::exists(file))
            throw BackendUnavailable(
                fmt::format("pretrained backend '{}': missing asset {}", desc_.name, file.string()));
        Container c;
        try {
            c = read_container(file);
        } catch (const FormatError& e) {
            throw BackendUnavailable(fmt::format("pretrained backend '{}': {}", desc_.name, e.what()));
        }
        const auto& d = desc_;
        check_shape(c.tensors, "image_encoder.proj", d.d_v, 3 * d.image_grid * d.image_grid, file);
        check_shape(c.tensors, "image_encoder.reserved", d.d_v, 1, file);
        check_shape(c.tensors, "audio_encoder.proj", d.d_a, d.audio_bins, file);
        check_shape(c.tensors, "audio_encoder.reserved", d.d_a, 1, file);
        int in = 3;
        for (int j = 0; j < d.num_layers(); ++j) {
            check_shape(c.tensors, block_weight(j), in, d.channels[j], file);
            check_shape(c.tensors, block_bias(j), 1, d.channels[j], file);
            in = d.channels[j];
        }
        const int tok = d.num_tokens * d.token_dim;
        check_shape(c.tensors, "multimodal.text_proj", tok, d.d_text, file);
        check_shape(c.tensors, "multimodal.frame_proj", tok, d.d_v, file);
        check_shape(c.tensors, "multimodal.bias", tok, 1, file);
        weights_ = std::move(c.tensors);
    });
}

const TensorMap& Backend::weights() const {
    ensure_loaded();
    return weights_;
}

const Matrix& Backend::w(const std::string& name) const {
    ensure_loaded();
    return weights_.at(name);
}

ImageEmbedding Backend::encode_image(const Frame& frame) const {
    const int g = desc_.image_grid;
    Vector x(3 * g * g);
    for (int c = 0; c < 3; ++c) {
        const Matrix grid = resize_area(frame.channel(c), g, g);
        for (int y = 0; y < g; ++y)
            for (int xx = 0; xx < g; ++xx) x((c * g + y) * g + xx) = 2.0 * grid(y, xx) - 1.0;
    }
    Vector h = (w("image_encoder.proj") * x).array().tanh().matrix();
    if (h.norm() < kZeroNorm) return {w("image_encoder.reserved").col(0)};
    return {unit(h)};
}

AudioEmbedding Backend::encode_audio(const AudioSegment& segment) const {
    const int bins = desc_.audio_bins;
    const auto n = static_cast<double>(segment.samples.size());
    const double rate = segment.sample_rate > 0 ? segment.sample_rate : n;
    Vector spec(bins);
    for (int k = 0; k < bins; ++k) {
        // Bin centres spread evenly below Nyquist.
        const double freq = (k + 1) * (rate / 2.0) / (bins + 1);
        const double step = 2.0 * std::numbers::pi * freq / rate;
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < segment.samples.size(); ++i) {
            re += segment.samples[i] * std::cos(step * i);
            im -= segment.samples[i] * std::sin(step * i);
        }
        const double mag = n > 0 ? std::hypot(re, im) / n : 0.0;
        spec(k) = std::log1p(100.0 * mag);
    }
    spec.array() -= spec.mean();
    Vector h = (w("audio_encoder.proj") * spec).array().tanh().matrix();
    if (h.norm() < kZeroNorm) return {w("audio_encoder.reserved").col(0)};
    return {unit(h)};
}

Matrix Backend::pixels_at(const Frame& frame, int resolution) const {
    const int p = resolution * resolution;
    Matrix px(p, 3);
    for (int c = 0; c < 3; ++c) {
        const Matrix plane = resize_image(frame.channel(c), resolution, resolution);
        for (int y = 0; y < resolution; ++y)
            for (int x = 0; x < resolution; ++x) px(y * resolution + x, c) = 2.0 * plane(y, x) - 1.0;
    }
    return px;
}

BackboneFeatures Backend::encode_backbone(std::span<const Frame> frames, int resolution,
                                          const std::vector<Matrix>* prompts) const {
    if (resolution <= 0) throw DimensionError(fmt::format("backbone: resolution must be positive, got {}", resolution));
    const int t = static_cast<int>(frames.size());
    const int p = resolution * resolution;
    const int layers = desc_.num_layers();
    const Eigen::Index rows = static_cast<Eigen::Index>(t) * p;

    if (prompts != nullptr) {
        if (static_cast<int>(prompts->size()) != layers)
            throw DimensionError(fmt::format("backbone: {} prompt tensors given for {} layers", prompts->size(), layers));
        for (int j = 0; j < layers; ++j) {
            const Matrix& pj = (*prompts)[j];
            if (pj.rows() != rows || pj.cols() != desc_.channels[j])
                throw DimensionError(fmt::format("backbone layer {}: prompt is {}x{}, layer features are {}x{}", j,
                                                 pj.rows(), pj.cols(), rows, desc_.channels[j]));
        }
    }

    BackboneFeatures out;
    out.frames = t;
    out.height = resolution;
    out.width = resolution;

    Matrix x(rows, 3);
    for (int i = 0; i < t; ++i) x.middleRows(static_cast<Eigen::Index>(i) * p, p) = pixels_at(frames[i], resolution);

    for (int j = 0; j < layers; ++j) {
        Matrix pre = x * w(block_weight(j));
        pre.rowwise() += w(block_bias(j)).row(0);
        Matrix block = desc_.linear_blocks ? pre : Matrix(pre.array().tanh());
        x = block;
        if (prompts != nullptr) {
            const Matrix& pj = (*prompts)[j];
            // Zero entries are skipped so an all-zero prompt leaves every bit untouched.
            for (Eigen::Index c = 0; c < x.cols(); ++c)
                for (Eigen::Index r = 0; r < x.rows(); ++r)
                    if (pj(r, c) != 0.0) x(r, c) += pj(r, c);
        }
        out.block_inputs.push_back(std::move(pre));
        out.block_outputs.push_back(std::move(block));
        out.layer_outputs.push_back(x);
    }
    return out;
}

std::vector<Matrix> Backend::backbone_backward(const BackboneFeatures& features, const Matrix& d_last) const {
    const int layers = features.num_layers();
    std::vector<Matrix> grads(layers);
    Matrix d = d_last;
    for (int j = layers - 1; j >= 0; --j) {
        grads[j] = d;
        if (j == 0) break;
        Matrix d_pre = desc_.linear_blocks
                           ? d
                           : Matrix(d.array() * (1.0 - features.block_outputs[j].array().square()));
        d = d_pre * w(block_weight(j)).transpose();
    }
    return grads;
}

PromptTokens Backend::encode_multimodal_prompt(const Vector& text, const Frame& frame) const {
    return encode_multimodal_prompt(text, encode_image(frame));
}

PromptTokens Backend::encode_multimodal_prompt(const Vector& text, const ImageEmbedding& frame_embedding) const {
    if (text.size() != desc_.d_text)
        throw DimensionError(fmt::format("multimodal encoder: text vector has dimension {}, expected {}", text.size(),
                                         desc_.d_text));
    if (frame_embedding.vector.size() != desc_.d_v)
        throw DimensionError(fmt::format("multimodal encoder: frame embedding has dimension {}, expected {}",
                                         frame_embedding.vector.size(), desc_.d_v));
    const Vector flat = (w("multimodal.text_proj") * text + w("multimodal.frame_proj") * frame_embedding.vector +
                         w("multimodal.bias").col(0))
                            .array()
                            .tanh()
                            .matrix();
    PromptTokens out{Matrix(desc_.num_tokens, desc_.token_dim)};
    for (int k = 0; k < desc_.num_tokens; ++k)
        out.tokens.row(k) = flat.segment(static_cast<Eigen::Index>(k) * desc_.token_dim, desc_.token_dim).transpose();
    return out;
}

Vector Backend::multimodal_backward(const PromptTokens& forward, const Matrix& d_tokens) const {
    Vector d_flat(desc_.num_tokens * desc_.token_dim);
    for (int k = 0; k < desc_.num_tokens; ++k)
        for (int c = 0; c < desc_.token_dim; ++c) {
            const double t = forward.tokens(k, c);
            d_flat(k * desc_.token_dim + c) = d_tokens(k, c) * (1.0 - t * t);
        }
    return w("multimodal.text_proj").transpose() * d_flat;
}

std::uint64_t Backend::checksum(std::string_view component) const {
    const auto& all = weights();
    std::string prefix;
    if (component == "image_encoder") prefix = "image_encoder.";
    else if (component == "audio_encoder") prefix = "audio_encoder.";
    else if (component == "backbone_trunk") prefix = "backbone.";
    else if (component == "multimodal_encoder") prefix = "multimodal.";
    else throw std::invalid_argument(fmt::format("unknown backend component '{}'", component));
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [name, m] : all)
        if (name.starts_with(prefix)) h = av2t::checksum(m, h);
    return h;
}

void Backend::export_assets(const std::filesystem::path& root) const {
    Json meta = {{"backend", to_json(desc_)}};
    write_container(root / desc_.name / "weights.av2t", meta, weights());
}

ImageEmbedding encode_image(const Frame& frame, const Backend& backend) { return backend.encode_image(frame); }

AudioEmbedding encode_audio(const AudioSegment& segment, const Backend& backend) {
    return backend.encode_audio(segment);
}

BackboneFeatures encode_backbone(std::span<const Frame> frames, const std::vector<Matrix>* prompts,
                                 const Backend& backend, int resolution) {
    return backend.encode_backbone(frames, resolution, prompts);
}

PromptTokens encode_multimodal_prompt(const Vector& text, const Frame& frame, const Backend& backend) {
    return backend.encode_multimodal_prompt(text, frame);
}

}  // namespace av2t
