#include "av2t/fusion.hpp"

#include <fmt/format.h>

#include <cmath>

namespace av2t {
namespace {

Matrix uniform_init(SplitMix& rng, int rows, int cols) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    Matrix m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
    return m;
}

void require_finite(const Vector& v, std::string_view stage) {
    if (!v.allFinite()) throw std::domain_error(fmt::format("{}: non-finite input", stage));
}

}  // namespace

std::string_view to_string(PromptSource s) {
    switch (s) {
        case PromptSource::fused: return "fused";
        case PromptSource::clip_only: return "clip_only";
        case PromptSource::clap_only: return "clap_only";
    }
    return "?";
}

PromptSource parse_prompt_source(std::string_view s) {
    if (s == "fused") return PromptSource::fused;
    if (s == "clip_only" || s == "clip-only") return PromptSource::clip_only;
    if (s == "clap_only" || s == "clap-only") return PromptSource::clap_only;
    throw std::invalid_argument(fmt::format("unknown prompt source '{}'", s));
}

ProjectionParams ProjectionParams::zeros(int d_a, int d_v, int d_s, int d_h, int d_text, Activation act) {
    return {Matrix::Zero(d_s, d_a), Matrix::Zero(d_s, d_v), Matrix::Zero(d_h, d_s), Vector::Zero(d_h),
            Matrix::Zero(d_text, d_h), Vector::Zero(d_text), act};
}

ProjectionParams ProjectionParams::init(int d_a, int d_v, int d_s, int d_h, int d_text, Activation act,
                                        std::uint64_t seed) {
    SplitMix rng(derive_seed(seed, "projection"));
    ProjectionParams p;
    p.activation = act;
    // Audio and visual projections see unit-norm inputs; scale by sqrt of the
    // input dimension so projected coordinates start at O(1).
    p.w_audio = uniform_init(rng, d_s, d_a) * std::sqrt(static_cast<double>(d_a));
    p.w_visual = uniform_init(rng, d_s, d_v) * std::sqrt(static_cast<double>(d_v));
    p.w_hidden = uniform_init(rng, d_h, d_s);
    p.b_hidden = Vector::Zero(d_h);
    p.w_out = uniform_init(rng, d_text, d_h);
    p.b_out = Vector::Zero(d_text);
    return p;
}

const Vector& PromptFeature::mlp_input() const {
    switch (source) {
        case PromptSource::clip_only: return f_clip;
        case PromptSource::clap_only: return f_clap;
        case PromptSource::fused: break;
    }
    return fused;
}

Vector project_audio(const AudioEmbedding& a, const ProjectionParams& params) {
    if (a.vector.size() != params.w_audio.cols())
        throw DimensionError(fmt::format("project_audio: embedding has dimension {}, W_a expects {}", a.vector.size(),
                                         params.w_audio.cols()));
    return params.w_audio * a.vector;
}

Vector project_visual(const ImageEmbedding& v, const ProjectionParams& params) {
    if (v.vector.size() != params.w_visual.cols())
        throw DimensionError(fmt::format("project_visual: embedding has dimension {}, W_v expects {}", v.vector.size(),
                                         params.w_visual.cols()));
    return params.w_visual * v.vector;
}

Vector fuse(const Vector& f_clip, const Vector& f_clap) {
    if (f_clip.size() != f_clap.size())
        throw DimensionError(fmt::format("fuse: dimensions differ ({} vs {})", f_clip.size(), f_clap.size()));
    return f_clip.cwiseProduct(f_clap);
}

Vector to_text_space(const Vector& fused, const ProjectionParams& params) {
    if (fused.size() != params.w_hidden.cols())
        throw DimensionError(fmt::format("to_text_space: input has dimension {}, MLP expects {}", fused.size(),
                                         params.w_hidden.cols()));
    require_finite(fused, "to_text_space");
    const Vector hidden = activate(params.activation, params.w_hidden * fused + params.b_hidden);
    return params.w_out * hidden + params.b_out;
}

PromptFeature build_prompt(const AudioEmbedding& a, const ImageEmbedding& v, const ProjectionParams& params,
                           PromptSource source) {
    PromptFeature p;
    p.source = source;
    p.f_clap = project_audio(a, params);
    p.f_clip = project_visual(v, params);
    p.fused = fuse(p.f_clip, p.f_clap);
    const Vector& in = p.mlp_input();
    if (in.size() != params.w_hidden.cols())
        throw DimensionError(fmt::format("build_prompt: shared dimension {} but MLP expects {}", in.size(),
                                         params.w_hidden.cols()));
    require_finite(in, "build_prompt");
    p.hidden_pre = params.w_hidden * in + params.b_hidden;
    p.text_space = params.w_out * activate(params.activation, p.hidden_pre) + params.b_out;
    return p;
}

void build_prompt_backward(const PromptFeature& prompt, const AudioEmbedding& a, const ImageEmbedding& v,
                           const ProjectionParams& params, const Vector& d_text_space, const Vector& d_mlp_input,
                           ProjectionParams& grads) {
    const Vector hidden = activate(params.activation, prompt.hidden_pre);
    grads.w_out += d_text_space * hidden.transpose();
    grads.b_out += d_text_space;
    const Vector d_hidden_pre =
        (params.w_out.transpose() * d_text_space).cwiseProduct(Vector(activate_grad(params.activation, prompt.hidden_pre)));
    grads.w_hidden += d_hidden_pre * prompt.mlp_input().transpose();
    grads.b_hidden += d_hidden_pre;

    Vector d_in = params.w_hidden.transpose() * d_hidden_pre;
    if (d_mlp_input.size() == d_in.size()) d_in += d_mlp_input;

    Vector d_clip, d_clap;
    switch (prompt.source) {
        case PromptSource::fused:
            d_clip = d_in.cwiseProduct(prompt.f_clap);
            d_clap = d_in.cwiseProduct(prompt.f_clip);
            break;
        case PromptSource::clip_only:
            d_clip = d_in;
            d_clap = Vector::Zero(d_in.size());
            break;
        case PromptSource::clap_only:
            d_clip = Vector::Zero(d_in.size());
            d_clap = d_in;
            break;
    }
    grads.w_visual += d_clip * v.vector.transpose();
    grads.w_audio += d_clap * a.vector.transpose();
}

}  // namespace av2t
