#include "av2t/adapter.hpp"

#include <algorithm>

namespace av2t {

std::string_view to_string(AdapterTap t) { return t == AdapterTap::shared ? "shared" : "text"; }

AdapterTap parse_adapter_tap(std::string_view s) {
    if (s == "shared" || s == "fused") return AdapterTap::shared;
    if (s == "text" || s == "text_space") return AdapterTap::text;
    throw std::invalid_argument(fmt::format("unknown adapter tap '{}'", s));
}

AdapterStack AdapterStack::zeros(const BackendDescriptor& backend, std::vector<int> layers, int input_dim,
                                 AdapterTap tap) {
    std::sort(layers.begin(), layers.end());
    layers.erase(std::unique(layers.begin(), layers.end()), layers.end());
    AdapterStack s;
    s.tap = tap;
    s.layer_selection = layers;
    for (int j : layers) {
        if (j < 0 || j >= backend.num_layers())
            throw DimensionError(fmt::format("adapter: layer {} outside backbone range [0, {})", j, backend.num_layers()));
        s.weight[j] = Matrix::Zero(backend.channels[j], input_dim);
        s.bias[j] = Vector::Zero(backend.channels[j]);
    }
    return s;
}

bool AdapterStack::selected(int layer) const {
    return std::binary_search(layer_selection.begin(), layer_selection.end(), layer);
}

int AdapterStack::input_dim() const {
    return layer_selection.empty() ? 0 : static_cast<int>(weight.at(layer_selection.front()).cols());
}

void AdapterStack::validate(const BackendDescriptor& backend) const {
    if (!std::is_sorted(layer_selection.begin(), layer_selection.end()))
        throw DimensionError("adapter: layer selection is not sorted");
    for (int j : layer_selection) {
        if (j < 0 || j >= backend.num_layers())
            throw DimensionError(fmt::format("adapter: layer {} outside backbone range [0, {})", j, backend.num_layers()));
        const auto w = weight.find(j);
        const auto b = bias.find(j);
        if (w == weight.end() || b == bias.end()) throw DimensionError(fmt::format("adapter: layer {} has no map", j));
        if (w->second.rows() != backend.channels[j] || b->second.size() != backend.channels[j])
            throw DimensionError(fmt::format("adapter layer {}: map produces {} channels, layer has {}", j,
                                             w->second.rows(), backend.channels[j]));
    }
}

const Vector& adapter_input(const PromptFeature& prompt, AdapterTap tap) {
    return tap == AdapterTap::shared ? prompt.mlp_input() : prompt.text_space;
}

Matrix make_prompt_tensor(const PromptFeature& prompt, int layer, int frames, int positions, const AdapterStack& stack) {
    if (!stack.selected(layer)) throw DimensionError(fmt::format("adapter: layer {} is not selected", layer));
    if (frames <= 0 || positions <= 0)
        throw DimensionError(fmt::format("adapter layer {}: spatial extent {}x{} is empty", layer, frames, positions));
    const Vector& in = adapter_input(prompt, stack.tap);
    const Matrix& w = stack.weight.at(layer);
    if (in.size() != w.cols())
        throw DimensionError(
            fmt::format("adapter layer {}: prompt vector has dimension {}, map expects {}", layer, in.size(), w.cols()));
    const Eigen::RowVectorXd row = (w * in + stack.bias.at(layer)).transpose();
    return row.replicate(static_cast<Eigen::Index>(frames) * positions, 1);
}

std::vector<Matrix> make_prompt_tensors(const PromptFeature& prompt, int frames, int positions,
                                        const AdapterStack& stack, const BackendDescriptor& backend) {
    std::vector<Matrix> out;
    out.reserve(backend.num_layers());
    for (int j = 0; j < backend.num_layers(); ++j) {
        if (stack.selected(j))
            out.push_back(make_prompt_tensor(prompt, j, frames, positions, stack));
        else
            out.push_back(Matrix::Zero(static_cast<Eigen::Index>(frames) * positions, backend.channels[j]));
    }
    return out;
}

BackboneFeatures inject(std::span<const Frame> frames, const PromptFeature& prompt, const AdapterStack& stack,
                        const Backend& backend, int resolution) {
    stack.validate(backend.descriptor());
    const auto prompts = make_prompt_tensors(prompt, static_cast<int>(frames.size()), resolution * resolution, stack,
                                             backend.descriptor());
    return backend.encode_backbone(frames, resolution, &prompts);
}

Vector adapter_backward(const PromptFeature& prompt, const std::vector<Matrix>& d_layers, const AdapterStack& stack,
                        AdapterStack& grads) {
    const Vector& in = adapter_input(prompt, stack.tap);
    Vector d_in = Vector::Zero(in.size());
    for (int j : stack.layer_selection) {
        const Vector d_row = d_layers.at(j).colwise().sum().transpose();
        grads.weight.at(j) += d_row * in.transpose();
        grads.bias.at(j) += d_row;
        d_in += stack.weight.at(j).transpose() * d_row;
    }
    return d_in;
}

}  // namespace av2t
