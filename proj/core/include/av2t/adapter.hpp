#pragma once

#include "av2t/common.hpp"
#include "av2t/encoders.hpp"
#include "av2t/fusion.hpp"

#include <fmt/format.h>

#include <map>
#include <span>
#include <string_view>
#include <vector>

namespace av2t {

/// Which prompt vector the adapters read: the shared-space vector that feeds
/// the MLP, or the MLP's text-space output.
enum class AdapterTap { shared, text };

std::string_view to_string(AdapterTap t);
AdapterTap parse_adapter_tap(std::string_view s);

/// Per-layer affine maps from the prompt vector to the layer's channel count.
struct AdapterStack {
    std::vector<int> layer_selection;  // sorted, unique
    std::map<int, Matrix> weight;      // C_j x d_in
    std::map<int, Vector> bias;        // C_j
    AdapterTap tap = AdapterTap::shared;

    /// Zero-initialised stack, so an untrained model matches the adapter-free one.
    static AdapterStack zeros(const BackendDescriptor& backend, std::vector<int> layers, int input_dim, AdapterTap tap);

    bool selected(int layer) const;
    int input_dim() const;

    /// Throws DimensionError if a selected layer is out of range or a map's
    /// output width disagrees with the layer's channel count.
    void validate(const BackendDescriptor& backend) const;

    template <class F>
    void for_each(F&& f) {
        for (int j : layer_selection) {
            f(fmt::format("layer{}.weight", j), weight.at(j));
            f(fmt::format("layer{}.bias", j), bias.at(j));
        }
    }
    template <class F>
    void for_each(F&& f) const {
        for (int j : layer_selection) {
            f(fmt::format("layer{}.weight", j), weight.at(j));
            f(fmt::format("layer{}.bias", j), bias.at(j));
        }
    }
};

const Vector& adapter_input(const PromptFeature& prompt, AdapterTap tap);

/// P_j: the layer's affine map applied to the prompt vector, then repeated
/// across all frames x positions rows. Shape (frames * positions) x C_j.
Matrix make_prompt_tensor(const PromptFeature& prompt, int layer, int frames, int positions, const AdapterStack& stack);

/// One tensor per backbone layer; unselected layers get zeros.
std::vector<Matrix> make_prompt_tensors(const PromptFeature& prompt, int frames, int positions,
                                        const AdapterStack& stack, const BackendDescriptor& backend);

/// Runs the backbone with adapter prompts added per layer.
BackboneFeatures inject(std::span<const Frame> frames, const PromptFeature& prompt, const AdapterStack& stack,
                        const Backend& backend, int resolution);

/// Accumulates adapter gradients from dL/dX_j (one per layer) and returns
/// dL/d(adapter input).
Vector adapter_backward(const PromptFeature& prompt, const std::vector<Matrix>& d_layers, const AdapterStack& stack,
                        AdapterStack& grads);

}  // namespace av2t
