#include "av2t/media_io.hpp"

#include <fmt/format.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace av2t {

RasterImage read_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&image, path.c_str()) == 0)
        throw MediaError(fmt::format("{}: cannot decode PNG: {}", path.string(), image.message));

    RasterImage out;
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    out.width = static_cast<int>(image.width);
    out.height = static_cast<int>(image.height);
    out.channels = color ? 3 : 1;
    out.pixels.resize(PNG_IMAGE_SIZE(image));
    if (png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr) == 0) {
        png_image_free(&image);
        throw MediaError(fmt::format("{}: cannot decode PNG: {}", path.string(), image.message));
    }
    return out;
}

void probe_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&image, path.c_str()) == 0)
        throw MediaError(fmt::format("{}: malformed image: {}", path.string(), image.message));
    png_image_free(&image);
}

void write_png(const std::filesystem::path& path, const RasterImage& img) {
    if (img.channels != 1 && img.channels != 3)
        throw MediaError(fmt::format("{}: unsupported channel count {}", path.string(), img.channels));
    if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height * img.channels)
        throw MediaError(fmt::format("{}: pixel buffer does not match {}x{}x{}", path.string(), img.width, img.height,
                                     img.channels));
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (png_image_write_to_file(&image, path.c_str(), 0, img.pixels.data(), 0, nullptr) == 0)
        throw MediaError(fmt::format("{}: cannot encode PNG: {}", path.string(), image.message));
}

namespace {

template <class T>
T read_le(const std::vector<unsigned char>& b, std::size_t pos) {
    T v{};
    std::memcpy(&v, b.data() + pos, sizeof(T));
    return v;
}

template <class T>
void append_le(std::vector<unsigned char>& b, T v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    b.insert(b.end(), p, p + sizeof(T));
}

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw MediaError(fmt::format("{}: cannot open", path.string()));
    const std::vector<unsigned char> b((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    auto fail = [&](std::string_view why) { return MediaError(fmt::format("{}: {}", path.string(), why)); };
    if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(b.data() + 8, "WAVE", 4) != 0)
        throw fail("not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    const unsigned char* data = nullptr;
    std::size_t data_len = 0;
    for (std::size_t pos = 12; pos + 8 <= b.size();) {
        const auto len = read_le<std::uint32_t>(b, pos + 4);
        if (pos + 8 + len > b.size()) throw fail("truncated chunk");
        if (std::memcmp(b.data() + pos, "fmt ", 4) == 0) {
            if (len < 16) throw fail("short fmt chunk");
            format = read_le<std::uint16_t>(b, pos + 8);
            channels = read_le<std::uint16_t>(b, pos + 10);
            rate = read_le<std::uint32_t>(b, pos + 12);
            bits = read_le<std::uint16_t>(b, pos + 22);
            if (format == 0xFFFE && len >= 26) format = read_le<std::uint16_t>(b, pos + 32);  // WAVE_FORMAT_EXTENSIBLE
        } else if (std::memcmp(b.data() + pos, "data", 4) == 0) {
            data = b.data() + pos + 8;
            data_len = len;
        }
        pos += 8 + len + (len & 1u);
    }
    if (data == nullptr || channels == 0 || rate == 0) throw fail("missing fmt or data chunk");
    if (!((format == 1 && (bits == 8 || bits == 16 || bits == 24 || bits == 32)) || (format == 3 && bits == 32)))
        throw fail(fmt::format("unsupported encoding (format {}, {} bits)", format, bits));

    const std::size_t width = bits / 8;
    const std::size_t frames = data_len / (width * channels);
    WavData out;
    out.sample_rate = static_cast<int>(rate);
    out.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const unsigned char* p = data + (i * channels + c) * width;
            double v = 0.0;
            if (format == 3) {
                float fv;
                std::memcpy(&fv, p, 4);
                v = fv;
            } else if (bits == 8) {
                v = (static_cast<int>(p[0]) - 128) / 128.0;
            } else if (bits == 16) {
                std::int16_t s;
                std::memcpy(&s, p, 2);
                v = s / 32768.0;
            } else if (bits == 24) {
                std::int32_t s = (p[0] << 8) | (p[1] << 16) | (p[2] << 24);
                v = (s >> 8) / 8388608.0;
            } else {
                std::int32_t s;
                std::memcpy(&s, p, 4);
                v = s / 2147483648.0;
            }
            acc += v;
        }
        // Single-channel data is copied through unchanged so float files round-trip exactly.
        out.samples[i] = channels == 1 ? static_cast<float>(acc) : static_cast<float>(acc / channels);
        out.samples[i] = std::clamp(out.samples[i], -1.0f, 1.0f);
    }
    return out;
}

void write_wav(const std::filesystem::path& path, std::span<const float> samples, int sample_rate) {
    const auto data_len = static_cast<std::uint32_t>(samples.size() * sizeof(float));
    std::vector<unsigned char> b;
    b.reserve(44 + data_len);
    b.insert(b.end(), {'R', 'I', 'F', 'F'});
    append_le<std::uint32_t>(b, 36 + data_len);
    b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    append_le<std::uint32_t>(b, 16);
    append_le<std::uint16_t>(b, 3);  // IEEE float
    append_le<std::uint16_t>(b, 1);
    append_le<std::uint32_t>(b, static_cast<std::uint32_t>(sample_rate));
    append_le<std::uint32_t>(b, static_cast<std::uint32_t>(sample_rate) * 4);
    append_le<std::uint16_t>(b, 4);
    append_le<std::uint16_t>(b, 32);
    b.insert(b.end(), {'d', 'a', 't', 'a'});
    append_le<std::uint32_t>(b, data_len);
    const auto* p = reinterpret_cast<const unsigned char*>(samples.data());
    b.insert(b.end(), p, p + data_len);

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw MediaError(fmt::format("{}: cannot open for writing", path.string()));
    f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

std::vector<float> resample_linear(std::span<const float> samples, int from_rate, int to_rate) {
    if (from_rate <= 0 || to_rate <= 0) throw std::invalid_argument("resample_linear: rates must be positive");
    if (from_rate == to_rate || samples.empty()) return {samples.begin(), samples.end()};
    const auto out_len = static_cast<std::size_t>(
        std::llround(static_cast<double>(samples.size()) * to_rate / static_cast<double>(from_rate)));
    std::vector<float> out(out_len);
    const double step = static_cast<double>(from_rate) / to_rate;
    for (std::size_t i = 0; i < out_len; ++i) {
        const double pos = i * step;
        const auto i0 = std::min(static_cast<std::size_t>(pos), samples.size() - 1);
        const auto i1 = std::min(i0 + 1, samples.size() - 1);
        const double t = pos - static_cast<double>(i0);
        out[i] = static_cast<float>(samples[i0] * (1.0 - t) + samples[i1] * t);
    }
    return out;
}

}  // namespace av2t
