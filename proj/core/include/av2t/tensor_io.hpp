#pragma once

#include "av2t/common.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace av2t {

using Json = nlohmann::ordered_json;

/// Named float64 tensors stored as matrices (vectors are N x 1).
using TensorMap = std::map<std::string, Matrix>;

class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Container layout (little-endian):
///   magic "AV2TTNSR" | u32 format version | u64 header length | header JSON |
///   tensor payloads (column-major float64) | u64 FNV-1a of all preceding bytes
/// The header holds caller metadata under "meta" and a tensor table under "tensors".
inline constexpr std::uint32_t kContainerVersion = 1;

void write_container(const std::filesystem::path& path, const Json& meta, const TensorMap& tensors);

struct Container {
    Json meta;
    TensorMap tensors;
};

/// Reads a container written by write_container. Truncation, bad checksums and
/// unknown versions raise FormatError; nothing partial is returned.
Container read_container(const std::filesystem::path& path);

/// Writes text atomically (temp file + rename).
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace av2t
