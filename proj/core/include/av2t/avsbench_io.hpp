#pragma once

#include "av2t/datamodel.hpp"
#include "av2t/tensor_io.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace av2t {

inline constexpr int kManifestVersion = 1;

/// A required input (dataset root, split directory, manifest) does not exist.
class MissingInput : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Folder and file names inside each clip directory:
///   <root>/<subset>/<split>/<clip_id>/{frames,audio,masks}/ plus an optional category file.
/// Files inside each folder are ordered lexicographically.
struct DatasetLayout {
    std::string frames_dir = "frames";
    std::string audio_dir = "audio";
    std::string masks_dir = "masks";
    std::string category_file = "category.txt";
};

struct ManifestEntry {
    std::string clip_id;
    std::string category;
    std::vector<std::string> frames;  // paths relative to the manifest root
    std::vector<std::string> audio;   // T per-second files, or one file covering T seconds
    std::vector<std::string> masks;
};

struct DatasetManifest {
    std::string root;
    Subset subset = Subset::S4;
    Split split = Split::train;
    int sample_rate = 16000;
    std::optional<int> declared_total;
    DatasetLayout layout;
    std::vector<ManifestEntry> entries;

    const ManifestEntry* find(const std::string& clip_id) const;
};

/// Public AVSBench split sizes (S4 3452/740/740, MS3 296/64/64).
int official_total(Subset subset, Split split);

struct ScanOptions {
    int sample_rate = 16000;
    std::optional<int> declared_total;
    DatasetLayout layout;
};

struct ScanResult {
    DatasetManifest manifest;
    std::vector<std::string> errors;  // per-clip problems and convention violations

    bool ok() const { return errors.empty(); }
};

/// Walks <root>/<subset>/<split>. Throws MissingInput when that directory does
/// not exist; everything else is reported per clip in ScanResult::errors.
ScanResult scan(const std::filesystem::path& root, Subset subset, Split split, const ScanOptions& options = {});

Json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const Json& j);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Conventional sidecar location: <root>/<subset>_<split>.manifest.json.
std::filesystem::path default_manifest_path(const std::filesystem::path& root, Subset subset, Split split);

/// Decodes one clip. Frames become unit intensities, audio is resampled to the
/// manifest rate, masks must be strictly {0, 255}.
VideoClip load_clip(const DatasetManifest& manifest, const std::string& clip_id);
std::vector<VideoClip> load_all(const DatasetManifest& manifest);

/// Writes a clip in the dataset layout and returns its manifest entry.
ManifestEntry write_clip(const std::filesystem::path& root, const VideoClip& clip, const DatasetLayout& layout = {});

// Synthetic desk-scale data ------------------------------------------------

struct SyntheticConfig {
    Subset subset = Subset::S4;
    Split split = Split::train;
    int clips = 2;
    int frames = 5;
    int height = 64;
    int width = 64;
    int sample_rate = 8000;
    std::uint64_t seed = 7;
    /// Draw an extra silent object that is not part of the mask, so the
    /// sounding object can only be told apart through the audio.
    bool silent_distractor = false;
};

enum class ShapeKind { disc, square, triangle, diamond };

struct SyntheticObject {
    std::string category;
    ShapeKind shape = ShapeKind::disc;
    std::array<double, 3> color{};
    double tone_hz = 0.0;
    double phase = 0.0;
    double radius = 0.0;
    std::vector<std::array<double, 2>> centers;  // per frame (y, x) in pixels
    bool sounding = true;
};

struct SyntheticClipSpec {
    std::string clip_id;
    std::array<double, 3> background{};
    std::vector<SyntheticObject> objects;
};

/// The deterministic description a synthetic tree is rendered from.
std::vector<SyntheticClipSpec> describe_synthetic(const SyntheticConfig& config);

/// Footprint of the sounding objects in frame t (0-based) of a clip.
Matrix render_mask(const SyntheticClipSpec& spec, int t, int height, int width);
Frame render_frame(const SyntheticClipSpec& spec, int t, int height, int width);
AudioSegment render_audio(const SyntheticClipSpec& spec, int t, int sample_rate);

/// Materialises a synthetic tree under <root>/<subset>/<split>, writes the
/// manifest sidecar and returns the manifest.
DatasetManifest make_synthetic(const std::filesystem::path& root, const SyntheticConfig& config);

}  // namespace av2t
