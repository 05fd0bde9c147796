#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace av2t {

/// Decode or encode failure; the message names the file.
class MediaError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// 8-bit raster with interleaved channels (1 = gray, 3 = RGB).
struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels;
};

RasterImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RasterImage& image);

/// Reads only the header; throws MediaError if the file is not a decodable PNG.
void probe_png(const std::filesystem::path& path);

struct WavData {
    int sample_rate = 0;
    std::vector<float> samples;  // mono; multi-channel input is averaged
};

/// Accepts 8/16/24/32-bit integer PCM and 32-bit IEEE float.
WavData read_wav(const std::filesystem::path& path);

/// Writes mono 32-bit IEEE float samples, which round-trip bit-exactly.
void write_wav(const std::filesystem::path& path, std::span<const float> samples, int sample_rate);

/// Linear-interpolation resampling of a whole signal from one rate to another.
std::vector<float> resample_linear(std::span<const float> samples, int from_rate, int to_rate);

}  // namespace av2t
