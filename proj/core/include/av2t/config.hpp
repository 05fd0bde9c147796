#pragma once

#include "av2t/encoders.hpp"
#include "av2t/pipeline.hpp"
#include "av2t/tensor_io.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace av2t {

class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct AblateConfig {
    double margin = 1.0;  // m_j points; fused must beat clip_only by more than this
};

/// A fully resolved configuration together with the JSON it was built from.
struct ResolvedConfig {
    RunConfig run;
    AblateConfig ablate;
    Json document;
};

/// Built-in defaults as a document with sections backend, model, train, ablate.
Json default_config(BackendKind kind = BackendKind::stub);

/// Merges `patch` into `base`. Every key of `patch` must already exist in
/// `base`; objects merge recursively, everything else is replaced.
void merge_strict(Json& base, const Json& patch, const std::string& prefix = "");

/// Applies one `dotted.key=value` override. Values parse as JSON when they can
/// and fall back to a plain string.
void apply_override(Json& doc, const std::string& assignment);

/// defaults(kind) < file < overrides, then validated.
ResolvedConfig load_config(BackendKind kind, const std::optional<std::filesystem::path>& file,
                           const std::vector<std::string>& overrides);

ResolvedConfig resolve(const Json& document);

}  // namespace av2t
