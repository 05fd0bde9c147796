#include "av2t/avsbench_io.hpp"

#include "av2t/media_io.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace av2t {
namespace fs = std::filesystem;

namespace {

std::vector<fs::path> list_files(const fs::path& dir, std::string_view ext) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string x = e.path().extension().string();
        std::transform(x.begin(), x.end(), x.begin(), [](unsigned char c) { return std::tolower(c); });
        if (x == ext) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string rel(const fs::path& p, const fs::path& root) { return p.lexically_relative(root).generic_string(); }

fs::path clip_dir(const fs::path& root, Subset subset, Split split, const std::string& clip_id) {
    return root / std::string(to_string(subset)) / std::string(to_string(split)) / clip_id;
}

std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(i);
}

std::vector<float> fit_length(std::vector<float> v, std::size_t n) {
    v.resize(n, 0.0f);
    return v;
}

}  // namespace

const ManifestEntry* DatasetManifest::find(const std::string& clip_id) const {
    for (const auto& e : entries)
        if (e.clip_id == clip_id) return &e;
    return nullptr;
}

int official_total(Subset subset, Split split) {
    if (subset == Subset::S4) return split == Split::train ? 3452 : 740;
    return split == Split::train ? 296 : 64;
}

ScanResult scan(const fs::path& root_in, Subset subset, Split split, const ScanOptions& options) {
    const fs::path root = fs::absolute(root_in).lexically_normal();
    const fs::path split_dir = root / std::string(to_string(subset)) / std::string(to_string(split));
    if (!fs::is_directory(split_dir)) throw MissingInput(fmt::format("dataset split directory {} does not exist", split_dir.string()));

    ScanResult result;
    DatasetManifest& m = result.manifest;
    m.root = root.string();
    m.subset = subset;
    m.split = split;
    m.sample_rate = options.sample_rate;
    m.declared_total = options.declared_total;
    m.layout = options.layout;

    std::vector<fs::path> clips;
    for (const auto& e : fs::directory_iterator(split_dir))
        if (e.is_directory()) clips.push_back(e.path());
    std::sort(clips.begin(), clips.end());

    const DatasetLayout& lay = options.layout;
    for (const fs::path& dir : clips) {
        ManifestEntry entry;
        entry.clip_id = dir.filename().string();
        std::vector<std::string> errs;

        const auto frames = list_files(dir / lay.frames_dir, ".png");
        const auto audio = list_files(dir / lay.audio_dir, ".wav");
        const auto masks = list_files(dir / lay.masks_dir, ".png");
        const std::size_t t = frames.size();

        if (t == 0) errs.push_back(fmt::format("{}: missing frames in {}", entry.clip_id, (dir / lay.frames_dir).string()));
        if (audio.empty())
            errs.push_back(fmt::format("{}: missing audio in {}", entry.clip_id, (dir / lay.audio_dir).string()));
        else if (t > 0 && audio.size() != t && audio.size() != 1)
            errs.push_back(fmt::format("{}: {} audio files for {} frames", entry.clip_id, audio.size(), t));

        if (first_frame_only(subset, split)) {
            if (masks.size() != 1)
                errs.push_back(fmt::format(
                    "{}: annotation convention violated, S4/train clips carry exactly one mask (first frame), found {}",
                    entry.clip_id, masks.size()));
        } else if (masks.size() != t) {
            errs.push_back(fmt::format("{}: annotation convention violated, {}/{} clips carry one mask per frame ({}), found {}",
                                       entry.clip_id, to_string(subset), to_string(split), t, masks.size()));
        }
        for (const auto& p : masks) {
            try {
                probe_png(p);
            } catch (const MediaError& e) {
                errs.push_back(fmt::format("{}: {}", entry.clip_id, e.what()));
            }
        }

        const fs::path cat = dir / lay.category_file;
        if (fs::is_regular_file(cat)) entry.category = trim(read_text_file(cat));

        if (!errs.empty()) {
            result.errors.insert(result.errors.end(), errs.begin(), errs.end());
            continue;
        }
        for (const auto& p : frames) entry.frames.push_back(rel(p, root));
        for (const auto& p : audio) entry.audio.push_back(rel(p, root));
        for (const auto& p : masks) entry.masks.push_back(rel(p, root));
        m.entries.push_back(std::move(entry));
    }

    if (options.declared_total && static_cast<int>(clips.size()) != *options.declared_total)
        result.errors.push_back(fmt::format("{}/{}: found {} clips, declared total is {}", to_string(subset),
                                            to_string(split), clips.size(), *options.declared_total));
    return result;
}

Json to_json(const DatasetManifest& m) {
    Json entries = Json::array();
    for (const auto& e : m.entries)
        entries.push_back({{"clip_id", e.clip_id},
                           {"category", e.category},
                           {"frames", e.frames},
                           {"audio", e.audio},
                           {"masks", e.masks}});
    return {{"manifest_version", kManifestVersion},
            {"root", m.root},
            {"subset", to_string(m.subset)},
            {"split", to_string(m.split)},
            {"sample_rate", m.sample_rate},
            {"resampler", "linear"},
            {"declared_total", m.declared_total ? Json(*m.declared_total) : Json(nullptr)},
            {"layout",
             {{"frames_dir", m.layout.frames_dir},
              {"audio_dir", m.layout.audio_dir},
              {"masks_dir", m.layout.masks_dir},
              {"category_file", m.layout.category_file}}},
            {"entries", entries}};
}

DatasetManifest manifest_from_json(const Json& j) {
    const int version = j.at("manifest_version").get<int>();
    if (version != kManifestVersion)
        throw std::runtime_error(fmt::format("manifest version {} unsupported (expected {})", version, kManifestVersion));
    DatasetManifest m;
    m.root = j.at("root").get<std::string>();
    m.subset = parse_subset(j.at("subset").get<std::string>());
    m.split = parse_split(j.at("split").get<std::string>());
    m.sample_rate = j.at("sample_rate").get<int>();
    if (!j.at("declared_total").is_null()) m.declared_total = j.at("declared_total").get<int>();
    const Json& lay = j.at("layout");
    m.layout = {lay.at("frames_dir").get<std::string>(), lay.at("audio_dir").get<std::string>(),
                lay.at("masks_dir").get<std::string>(), lay.at("category_file").get<std::string>()};
    for (const auto& e : j.at("entries"))
        m.entries.push_back({e.at("clip_id").get<std::string>(), e.at("category").get<std::string>(),
                             e.at("frames").get<std::vector<std::string>>(), e.at("audio").get<std::vector<std::string>>(),
                             e.at("masks").get<std::vector<std::string>>()});
    return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& m) { write_text_file(path, to_json(m).dump(2) + "\n"); }

DatasetManifest read_manifest(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw MissingInput(fmt::format("manifest {} does not exist", path.string()));
    return manifest_from_json(Json::parse(read_text_file(path)));
}

fs::path default_manifest_path(const fs::path& root, Subset subset, Split split) {
    return root / fmt::format("{}_{}.manifest.json", to_string(subset), to_string(split));
}

VideoClip load_clip(const DatasetManifest& manifest, const std::string& clip_id) {
    const ManifestEntry* e = manifest.find(clip_id);
    if (e == nullptr) throw std::out_of_range(fmt::format("clip '{}' is not in the manifest", clip_id));
    const fs::path root = manifest.root;

    VideoClip clip;
    clip.clip_id = e->clip_id;
    clip.category = e->category;
    clip.subset = manifest.subset;
    clip.split = manifest.split;

    for (std::size_t i = 0; i < e->frames.size(); ++i) {
        const fs::path p = root / e->frames[i];
        const RasterImage img = read_png(p);
        const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
        std::vector<std::uint8_t> planar(3 * n);
        for (std::size_t k = 0; k < n; ++k)
            for (int c = 0; c < 3; ++c) planar[c * n + k] = img.pixels[k * img.channels + (img.channels == 3 ? c : 0)];
        clip.frames.emplace_back(img.height, img.width, std::move(planar), static_cast<int>(i) + 1);
    }

    const int t = clip.num_frames();
    const int sr = manifest.sample_rate;
    if (e->audio.size() == static_cast<std::size_t>(t)) {
        for (int i = 0; i < t; ++i) {
            const WavData w = read_wav(root / e->audio[i]);
            clip.audio.push_back({fit_length(resample_linear(w.samples, w.sample_rate, sr), sr), sr, i + 1});
        }
    } else if (e->audio.size() == 1) {
        const WavData w = read_wav(root / e->audio[0]);
        const auto all = fit_length(resample_linear(w.samples, w.sample_rate, sr), static_cast<std::size_t>(sr) * t);
        for (int i = 0; i < t; ++i)
            clip.audio.push_back({std::vector<float>(all.begin() + static_cast<std::ptrdiff_t>(i) * sr,
                                                     all.begin() + static_cast<std::ptrdiff_t>(i + 1) * sr),
                                  sr, i + 1});
    } else {
        throw MediaError(fmt::format("{}: {} audio files for {} frames", clip_id, e->audio.size(), t));
    }

    if (!e->masks.empty()) {
        MaskSet gt;
        gt.kind = MaskKind::binary;
        for (std::size_t k = 0; k < e->masks.size(); ++k) {
            const fs::path p = root / e->masks[k];
            const RasterImage img = read_png(p);
            Matrix m(img.height, img.width);
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x) {
                    const std::size_t base = (static_cast<std::size_t>(y) * img.width + x) * img.channels;
                    const std::uint8_t v = img.pixels[base];
                    for (int c = 0; c < img.channels; ++c) {
                        const std::uint8_t vc = img.pixels[base + c];
                        if ((vc != 0 && vc != 255) || vc != v)
                            throw MediaError(fmt::format("{}: mask value {} at ({}, {}) is not bilevel 0/255",
                                                         p.string(), vc, y, x));
                    }
                    m(y, x) = v == 255 ? 1.0 : 0.0;
                }
            gt.masks.push_back(std::move(m));
            gt.frame_indices.push_back(first_frame_only(manifest.subset, manifest.split) ? 1 : static_cast<int>(k) + 1);
        }
        clip.ground_truth = std::move(gt);
    }

    const auto report = validate_clip(clip);
    if (!report.empty()) throw std::runtime_error(fmt::format("{}: invalid clip: {}", clip_id, fmt::join(report, "; ")));
    return clip;
}

std::vector<VideoClip> load_all(const DatasetManifest& manifest) {
    std::vector<VideoClip> out;
    out.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) out.push_back(load_clip(manifest, e.clip_id));
    return out;
}

ManifestEntry write_clip(const fs::path& root, const VideoClip& clip, const DatasetLayout& layout) {
    const fs::path dir = clip_dir(root, clip.subset, clip.split, clip.clip_id);
    ManifestEntry entry;
    entry.clip_id = clip.clip_id;
    entry.category = clip.category;
    for (const Frame& f : clip.frames) {
        RasterImage img{f.width(), f.height(), 3, {}};
        const std::size_t n = static_cast<std::size_t>(f.width()) * f.height();
        img.pixels.resize(3 * n);
        for (std::size_t k = 0; k < n; ++k)
            for (int c = 0; c < 3; ++c) img.pixels[k * 3 + c] = f.bytes()[c * n + k];
        const fs::path p = dir / layout.frames_dir / fmt::format("{:05d}.png", f.index());
        write_png(p, img);
        entry.frames.push_back(rel(p, root));
    }
    for (const AudioSegment& a : clip.audio) {
        const fs::path p = dir / layout.audio_dir / fmt::format("{:05d}.wav", a.index);
        write_wav(p, a.samples, a.sample_rate);
        entry.audio.push_back(rel(p, root));
    }
    if (clip.ground_truth) {
        const MaskSet& gt = *clip.ground_truth;
        for (std::size_t k = 0; k < gt.masks.size(); ++k) {
            const Matrix& m = gt.masks[k];
            RasterImage img{static_cast<int>(m.cols()), static_cast<int>(m.rows()), 1, {}};
            img.pixels.resize(static_cast<std::size_t>(m.size()));
            for (Eigen::Index y = 0; y < m.rows(); ++y)
                for (Eigen::Index x = 0; x < m.cols(); ++x)
                    img.pixels[static_cast<std::size_t>(y * m.cols() + x)] = m(y, x) >= 0.5 ? 255 : 0;
            const fs::path p = dir / layout.masks_dir / fmt::format("{:05d}.png", gt.frame_indices[k]);
            write_png(p, img);
            entry.masks.push_back(rel(p, root));
        }
    }
    if (!clip.category.empty()) write_text_file(dir / layout.category_file, clip.category + "\n");
    return entry;
}

// Synthetic data ------------------------------------------------------------

namespace {

struct Category {
    const char* name;
    ShapeKind shape;
    std::array<double, 3> color;
    double tone_hz;
};

constexpr Category kCategories[] = {
    {"guitar", ShapeKind::disc, {0.85, 0.20, 0.15}, 440.0},
    {"dog", ShapeKind::square, {0.20, 0.75, 0.25}, 660.0},
    {"car", ShapeKind::triangle, {0.20, 0.35, 0.90}, 990.0},
    {"bird", ShapeKind::diamond, {0.90, 0.80, 0.20}, 1485.0},
};
constexpr int kNumCategories = static_cast<int>(std::size(kCategories));

bool inside(const SyntheticObject& o, int t, double y, double x) {
    const double dy = y - o.centers[t][0];
    const double dx = x - o.centers[t][1];
    const double r = o.radius;
    switch (o.shape) {
        case ShapeKind::disc: return dy * dy + dx * dx <= r * r;
        case ShapeKind::square: return std::abs(dy) <= 0.85 * r && std::abs(dx) <= 0.85 * r;
        case ShapeKind::diamond: return std::abs(dy) + std::abs(dx) <= r;
        case ShapeKind::triangle: return dy >= -r && dy <= 0.6 * r && std::abs(dx) <= (dy + r) / 1.6;
    }
    return false;
}

}  // namespace

std::vector<SyntheticClipSpec> describe_synthetic(const SyntheticConfig& cfg) {
    if (cfg.clips <= 0 || cfg.frames <= 0 || cfg.height <= 0 || cfg.width <= 0 || cfg.sample_rate <= 0)
        throw std::invalid_argument("make_synthetic: counts and shapes must be positive");
    SplitMix rng(derive_seed(cfg.seed, fmt::format("synthetic/{}/{}", to_string(cfg.subset), to_string(cfg.split))));
    const double side = std::min(cfg.height, cfg.width);

    std::vector<SyntheticClipSpec> specs;
    for (int c = 0; c < cfg.clips; ++c) {
        SyntheticClipSpec spec;
        spec.clip_id = fmt::format("clip_{:04d}", c);
        const double gray = rng.uniform(0.12, 0.42);
        spec.background = {gray + rng.uniform(-0.05, 0.05), gray, gray + rng.uniform(-0.05, 0.05)};

        const int sounding = cfg.subset == Subset::MS3 ? 2 : 1;
        const int total = sounding + (cfg.silent_distractor ? 1 : 0);
        std::vector<int> cats;
        while (static_cast<int>(cats.size()) < std::min(total, kNumCategories)) {
            const int k = static_cast<int>(rng.below(kNumCategories));
            if (std::find(cats.begin(), cats.end(), k) == cats.end()) cats.push_back(k);
        }
        // Silent objects are drawn first so sounding objects stay fully visible.
        for (int k = static_cast<int>(cats.size()) - 1; k >= 0; --k) {
            const Category& cat = kCategories[cats[k]];
            SyntheticObject o;
            o.category = cat.name;
            o.shape = cat.shape;
            o.color = cat.color;
            o.tone_hz = cat.tone_hz;
            o.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
            o.sounding = k < sounding;
            o.radius = rng.uniform(0.14, 0.24) * side;
            double cy = rng.uniform(o.radius, cfg.height - o.radius);
            double cx = rng.uniform(o.radius, cfg.width - o.radius);
            for (int t = 0; t < cfg.frames; ++t) {
                o.centers.push_back({cy, cx});
                cy = std::clamp(cy + rng.uniform(-0.05, 0.05) * side, o.radius, cfg.height - o.radius);
                cx = std::clamp(cx + rng.uniform(-0.05, 0.05) * side, o.radius, cfg.width - o.radius);
            }
            spec.objects.push_back(std::move(o));
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

Matrix render_mask(const SyntheticClipSpec& spec, int t, int height, int width) {
    Matrix m = Matrix::Zero(height, width);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            for (const auto& o : spec.objects)
                if (o.sounding && inside(o, t, y + 0.5, x + 0.5)) m(y, x) = 1.0;
    return m;
}

Frame render_frame(const SyntheticClipSpec& spec, int t, int height, int width) {
    const std::size_t n = static_cast<std::size_t>(height) * width;
    std::vector<double> planar(3 * n);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            std::array<double, 3> rgb = spec.background;
            for (const auto& o : spec.objects)
                if (inside(o, t, y + 0.5, x + 0.5)) rgb = o.color;
            for (int c = 0; c < 3; ++c) planar[c * n + static_cast<std::size_t>(y) * width + x] = rgb[c];
        }
    return Frame::from_unit(height, width, planar, t + 1);
}

AudioSegment render_audio(const SyntheticClipSpec& spec, int t, int sample_rate) {
    AudioSegment seg;
    seg.sample_rate = sample_rate;
    seg.index = t + 1;
    seg.samples.assign(sample_rate, 0.0f);
    int sounding = 0;
    for (const auto& o : spec.objects) sounding += o.sounding ? 1 : 0;
    if (sounding == 0) return seg;
    const double amp = 0.6 / sounding;
    for (int i = 0; i < sample_rate; ++i) {
        const double time = t + static_cast<double>(i) / sample_rate;
        double v = 0.0;
        for (const auto& o : spec.objects)
            if (o.sounding) v += amp * std::sin(2.0 * std::numbers::pi * o.tone_hz * time + o.phase);
        seg.samples[i] = static_cast<float>(v);
    }
    return seg;
}

DatasetManifest make_synthetic(const fs::path& root_in, const SyntheticConfig& cfg) {
    const fs::path root = fs::absolute(root_in).lexically_normal();
    for (const SyntheticClipSpec& spec : describe_synthetic(cfg)) {
        VideoClip clip;
        clip.clip_id = spec.clip_id;
        for (const auto& o : spec.objects)
            if (o.sounding) clip.category += (clip.category.empty() ? "" : "+") + o.category;
        clip.subset = cfg.subset;
        clip.split = cfg.split;
        MaskSet gt;
        for (int t = 0; t < cfg.frames; ++t) {
            clip.frames.push_back(render_frame(spec, t, cfg.height, cfg.width));
            clip.audio.push_back(render_audio(spec, t, cfg.sample_rate));
            if (!first_frame_only(cfg.subset, cfg.split) || t == 0) {
                gt.masks.push_back(render_mask(spec, t, cfg.height, cfg.width));
                gt.frame_indices.push_back(t + 1);
            }
        }
        clip.ground_truth = std::move(gt);
        write_clip(root, clip);
    }
    ScanOptions opts;
    opts.sample_rate = cfg.sample_rate;
    ScanResult r = scan(root, cfg.subset, cfg.split, opts);
    if (!r.ok()) throw std::runtime_error(fmt::format("synthetic tree failed its own scan: {}", fmt::join(r.errors, "; ")));
    write_manifest(default_manifest_path(root, cfg.subset, cfg.split), r.manifest);
    return r.manifest;
}

}  // namespace av2t
