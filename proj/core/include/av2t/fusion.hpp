#pragma once

#include "av2t/activation.hpp"
#include "av2t/common.hpp"
#include "av2t/encoders.hpp"

#include <string_view>

namespace av2t {

/// Which vector feeds the text-space MLP. `fused` is the Hadamard product of
/// the two projected embeddings; the other two arms use a single projection.
enum class PromptSource { fused, clip_only, clap_only };

std::string_view to_string(PromptSource s);
PromptSource parse_prompt_source(std::string_view s);

/// Learned maps of the semantically aligned feature module.
struct ProjectionParams {
    Matrix w_audio;   // d_s x d_a, no bias
    Matrix w_visual;  // d_s x d_v, no bias
    Matrix w_hidden;  // d_h x d_s
    Vector b_hidden;  // d_h
    Matrix w_out;     // d_text x d_h
    Vector b_out;     // d_text
    Activation activation = Activation::gelu;

    int d_shared() const { return static_cast<int>(w_audio.rows()); }

    /// Zero parameters with the given shapes.
    static ProjectionParams zeros(int d_a, int d_v, int d_s, int d_h, int d_text, Activation act);

    /// Fan-in scaled uniform initialisation drawn from `seed`.
    static ProjectionParams init(int d_a, int d_v, int d_s, int d_h, int d_text, Activation act, std::uint64_t seed);

    /// Visits every trainable tensor as (name, Matrix&). Vectors are presented as N x 1 maps.
    template <class F>
    void for_each(F&& f) {
        f("w_audio", w_audio);
        f("w_visual", w_visual);
        f("w_hidden", w_hidden);
        f("b_hidden", b_hidden);
        f("w_out", w_out);
        f("b_out", b_out);
    }
    template <class F>
    void for_each(F&& f) const {
        f("w_audio", w_audio);
        f("w_visual", w_visual);
        f("w_hidden", w_hidden);
        f("b_hidden", b_hidden);
        f("w_out", w_out);
        f("b_out", b_out);
    }
};

struct PromptFeature {
    Vector f_clap;
    Vector f_clip;
    Vector fused;       // f_clip ⊙ f_clap, always computed
    Vector text_space;  // MLP output
    PromptSource source = PromptSource::fused;
    Vector hidden_pre;  // MLP hidden pre-activation, kept for backprop

    /// The d_s vector that the MLP (and adapters) consume for this source arm.
    const Vector& mlp_input() const;
};

Vector project_audio(const AudioEmbedding& a, const ProjectionParams& params);
Vector project_visual(const ImageEmbedding& v, const ProjectionParams& params);
Vector fuse(const Vector& f_clip, const Vector& f_clap);
Vector to_text_space(const Vector& fused, const ProjectionParams& params);
PromptFeature build_prompt(const AudioEmbedding& a, const ImageEmbedding& v, const ProjectionParams& params,
                           PromptSource source);

/// Accumulates parameter gradients of build_prompt into `grads` given
/// dL/dtext_space and an extra dL/d(mlp_input) contribution (from adapters
/// tapping the shared-space vector).
void build_prompt_backward(const PromptFeature& prompt, const AudioEmbedding& a, const ImageEmbedding& v,
                           const ProjectionParams& params, const Vector& d_text_space, const Vector& d_mlp_input,
                           ProjectionParams& grads);

}  // namespace av2t
