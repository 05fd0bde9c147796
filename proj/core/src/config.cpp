#include "av2t/config.hpp"

#include <fmt/format.h>

namespace av2t {

Json default_config(BackendKind kind) {
    RunConfig rc;
    rc.backend = kind == BackendKind::stub ? BackendDescriptor::stub_defaults() : BackendDescriptor::pretrained_defaults();
    Json doc = to_json(rc);
    doc["ablate"] = {{"margin", AblateConfig{}.margin}};
    return doc;
}

namespace {

bool compatible(const Json& old_value, const Json& new_value, const std::string& key) {
    if (old_value.is_number() && new_value.is_number()) return true;
    if (key == "model.adapter_layers") return new_value.is_string() || new_value.is_array();
    return old_value.type() == new_value.type();
}

}  // namespace

void merge_strict(Json& base, const Json& patch, const std::string& prefix) {
    if (!patch.is_object()) throw ConfigError(fmt::format("config section '{}' must be an object", prefix));
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError(fmt::format("unknown config key '{}'", key));
        Json& slot = base[it.key()];
        if (slot.is_object()) {
            merge_strict(slot, it.value(), key);
        } else {
            if (!compatible(slot, it.value(), key))
                throw ConfigError(fmt::format("config key '{}' expects {}, got {}", key, slot.type_name(),
                                              it.value().type_name()));
            slot = it.value();
        }
    }
}

void apply_override(Json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError(fmt::format("override '{}' is not of the form key=value", assignment));
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    Json patch = value;
    std::string::size_type end = key.size();
    while (true) {
        const auto dot = key.rfind('.', end - 1);
        const std::string part = key.substr(dot == std::string::npos ? 0 : dot + 1,
                                            end - (dot == std::string::npos ? 0 : dot + 1));
        if (part.empty()) throw ConfigError(fmt::format("override key '{}' is malformed", key));
        patch = Json{{part, patch}};
        if (dot == std::string::npos) break;
        end = dot;
    }
    merge_strict(doc, patch);
}

ResolvedConfig resolve(const Json& document) {
    ResolvedConfig out;
    out.document = document;
    try {
        out.run = run_config_from_json(document);
        out.ablate.margin = document.at("ablate").at("margin").get<double>();
    } catch (const Json::exception& e) {
        throw ConfigError(fmt::format("invalid config: {}", e.what()));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("invalid config: {}", e.what()));
    }
    return out;
}

ResolvedConfig load_config(BackendKind kind, const std::optional<std::filesystem::path>& file,
                           const std::vector<std::string>& overrides) {
    Json doc = default_config(kind);
    if (file) {
        const std::string text = read_text_file(*file);
        Json patch = Json::parse(text, nullptr, false);
        if (patch.is_discarded()) throw ConfigError(fmt::format("{}: not valid JSON", file->string()));
        // A file may switch backend kind; its defaults then apply underneath.
        if (patch.contains("backend") && patch["backend"].contains("kind")) {
            const BackendKind k = parse_backend_kind(patch["backend"]["kind"].get<std::string>());
            if (k != kind) doc = default_config(k);
        }
        merge_strict(doc, patch);
    }
    for (const auto& o : overrides) apply_override(doc, o);
    return resolve(doc);
}

}  // namespace av2t
