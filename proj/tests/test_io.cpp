#include "av2t/avsbench_io.hpp"
#include "av2t/image_ops.hpp"
#include "av2t/media_io.hpp"
#include "av2t/metrics.hpp"
#include "av2t/tensor_io.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

namespace av2t {
namespace {
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[e.path().lexically_relative(root).generic_string()] = slurp(e.path());
    return out;
}

void write_pcm16(const fs::path& path, const std::vector<double>& samples, int rate) {
    std::vector<char> b;
    auto put32 = [&](std::uint32_t v) { for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff)); };
    auto put16 = [&](std::uint16_t v) { for (int i = 0; i < 2; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff)); };
    const auto data = static_cast<std::uint32_t>(samples.size() * 2);
    b.insert(b.end(), {'R', 'I', 'F', 'F'});
    put32(36 + data);
    b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put32(16);
    put16(1);
    put16(1);
    put32(static_cast<std::uint32_t>(rate));
    put32(static_cast<std::uint32_t>(rate) * 2);
    put16(2);
    put16(16);
    b.insert(b.end(), {'d', 'a', 't', 'a'});
    put32(data);
    for (double s : samples) put16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(s * 32767.0))));
    std::ofstream(path, std::ios::binary).write(b.data(), static_cast<std::streamsize>(b.size()));
}

// Tensor container ------------------------------------------------------------

TEST(TensorContainer, RoundTripIsBitExact) {
    test::TempDir dir;
    SplitMix rng(1);
    TensorMap t;
    t["a"] = Matrix::NullaryExpr(3, 4, [&] { return rng.normal(); });
    t["b.vec"] = Matrix::NullaryExpr(5, 1, [&] { return rng.normal(); });
    t["empty"] = Matrix(0, 3);
    const Json meta = {{"k", 1}, {"s", "x"}};
    write_container(dir / "c.bin", meta, t);
    const Container c = read_container(dir / "c.bin");
    EXPECT_EQ(c.meta, meta);
    ASSERT_EQ(c.tensors.size(), 3u);
    for (const auto& [name, m] : t) {
        ASSERT_EQ(c.tensors.at(name).rows(), m.rows());
        ASSERT_EQ(c.tensors.at(name).cols(), m.cols());
        EXPECT_EQ(std::memcmp(c.tensors.at(name).data(), m.data(), sizeof(double) * m.size()), 0);
    }
}

TEST(TensorContainer, TruncationAndCorruptionAreFormatErrors) {
    test::TempDir dir;
    TensorMap t;
    t["w"] = Matrix::Ones(4, 4);
    write_container(dir / "c.bin", {{"x", 1}}, t);
    const std::string full = slurp(dir / "c.bin");
    for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{20}, full.size() / 2, full.size() - 1}) {
        std::ofstream(dir / "t.bin", std::ios::binary).write(full.data(), static_cast<std::streamsize>(cut));
        EXPECT_THROW(read_container(dir / "t.bin"), FormatError) << "cut at " << cut;
    }
    std::string bad = full;
    bad[bad.size() / 2] ^= 0x1;
    std::ofstream(dir / "b.bin", std::ios::binary).write(bad.data(), static_cast<std::streamsize>(bad.size()));
    EXPECT_THROW(read_container(dir / "b.bin"), FormatError);
    EXPECT_THROW(read_container(dir / "missing.bin"), FormatError);
}

// Media --------------------------------------------------------------------------

TEST(Media, PngRoundTrip) {
    test::TempDir dir;
    RasterImage img{5, 3, 3, {}};
    for (int i = 0; i < 45; ++i) img.pixels.push_back(static_cast<std::uint8_t>(i * 5));
    write_png(dir / "x.png", img);
    const RasterImage back = read_png(dir / "x.png");
    EXPECT_EQ(back.width, 5);
    EXPECT_EQ(back.height, 3);
    EXPECT_EQ(back.channels, 3);
    EXPECT_EQ(back.pixels, img.pixels);
}

TEST(Media, MalformedPngNamesFile) {
    test::TempDir dir;
    std::ofstream(dir / "bad.png") << "not a png";
    try {
        probe_png(dir / "bad.png");
        FAIL();
    } catch (const MediaError& e) {
        EXPECT_NE(std::string(e.what()).find("bad.png"), std::string::npos);
    }
}

TEST(Media, FloatWavRoundTripsExactly) {
    test::TempDir dir;
    SplitMix rng(2);
    std::vector<float> s(777);
    for (auto& x : s) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    write_wav(dir / "a.wav", s, 8000);
    const WavData w = read_wav(dir / "a.wav");
    EXPECT_EQ(w.sample_rate, 8000);
    EXPECT_EQ(w.samples, s);
}

TEST(Media, ReadsPcm16) {
    test::TempDir dir;
    write_pcm16(dir / "p.wav", {0.0, 0.5, -0.5, 1.0}, 100);
    const WavData w = read_wav(dir / "p.wav");
    ASSERT_EQ(w.samples.size(), 4u);
    EXPECT_NEAR(w.samples[1], 0.5, 1e-4);
    EXPECT_NEAR(w.samples[2], -0.5, 1e-4);
}

TEST(Media, ResampleLength) {
    std::vector<float> s(200, 0.25f);
    EXPECT_EQ(resample_linear(s, 200, 100).size(), 100u);
    EXPECT_EQ(resample_linear(s, 100, 300).size(), 600u);
    for (float v : resample_linear(s, 200, 70)) EXPECT_FLOAT_EQ(v, 0.25f);
}

// Image resampling ----------------------------------------------------------------

TEST(ImageOps, NearestKeepsBinaryAndAreaPreservesMean) {
    SplitMix rng(3);
    const Matrix m = test::mask_from_bits(static_cast<std::uint32_t>(rng.below(1u << 16)), 4, 4);
    const Matrix up = resize_nearest(m, 8, 8);
    EXPECT_TRUE((up.array() == 0.0 || up.array() == 1.0).all());
    EXPECT_EQ(resize_nearest(up, 4, 4), m);
    const Matrix a = resize_area(up, 4, 4);
    EXPECT_NEAR(a.mean(), up.mean(), 1e-12);
    const Matrix b = resize_bilinear(m, 7, 9);
    EXPECT_GE(b.minCoeff(), 0.0);
    EXPECT_LE(b.maxCoeff(), 1.0);
    EXPECT_EQ(resize_image(m, 4, 4), m);
}

// Dataset ingestion ----------------------------------------------------------------

SyntheticConfig small(Subset subset, Split split, int clips = 2, int frames = 5) {
    SyntheticConfig c;
    c.subset = subset;
    c.split = split;
    c.clips = clips;
    c.frames = frames;
    c.height = 16;
    c.width = 16;
    c.sample_rate = 200;
    return c;
}

TEST(Scan, SyntheticS4TrainHasOneMaskPerClip) {
    test::TempDir dir;
    const DatasetManifest m = make_synthetic(dir.path(), small(Subset::S4, Split::train));
    ASSERT_EQ(m.entries.size(), 2u);
    for (const auto& e : m.entries) {
        EXPECT_EQ(e.frames.size(), 5u);
        EXPECT_EQ(e.audio.size(), 5u);
        EXPECT_EQ(e.masks.size(), 1u);
    }
    EXPECT_TRUE(fs::exists(default_manifest_path(dir.path(), Subset::S4, Split::train)));
}

TEST(Scan, FullyMaskedS4TrainViolatesConvention) {
    test::TempDir dir;
    make_synthetic(dir.path(), small(Subset::S4, Split::val));
    fs::rename(dir / "S4/val", dir / "S4/train");
    const ScanResult r = scan(dir.path(), Subset::S4, Split::train);
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(r.manifest.entries.empty());
    ASSERT_EQ(r.errors.size(), 2u);
    EXPECT_NE(r.errors[0].find("annotation convention violated"), std::string::npos);
}

TEST(Scan, MS3NeedsAllFrameMasks) {
    test::TempDir dir;
    make_synthetic(dir.path(), small(Subset::MS3, Split::train, 1, 3));
    EXPECT_TRUE(scan(dir.path(), Subset::MS3, Split::train).ok());
    fs::remove(dir / "MS3/train/clip_0000/masks/00002.png");
    const ScanResult r = scan(dir.path(), Subset::MS3, Split::train);
    EXPECT_FALSE(r.ok());
}

TEST(Scan, MissingAudioAndMalformedMaskReportedPerClip) {
    test::TempDir dir;
    make_synthetic(dir.path(), small(Subset::S4, Split::train, 3, 2));
    fs::remove_all(dir / "S4/train/clip_0000/audio");
    std::ofstream(dir / "S4/train/clip_0001/masks/00001.png", std::ios::trunc) << "garbage";
    const ScanResult r = scan(dir.path(), Subset::S4, Split::train);
    ASSERT_EQ(r.errors.size(), 2u);
    EXPECT_NE(r.errors[0].find("missing audio"), std::string::npos);
    EXPECT_NE(r.errors[1].find("00001.png"), std::string::npos);
    ASSERT_EQ(r.manifest.entries.size(), 1u);
    EXPECT_EQ(r.manifest.entries[0].clip_id, "clip_0002");
}

TEST(Scan, MissingRootIsMissingInput) {
    test::TempDir dir;
    EXPECT_THROW(scan(dir / "nope", Subset::S4, Split::train), MissingInput);
}

TEST(Scan, DeclaredTotalsChecked) {
    test::TempDir dir;
    make_synthetic(dir.path(), small(Subset::S4, Split::test, 2, 1));
    ScanOptions opts;
    opts.sample_rate = 200;
    opts.declared_total = 2;
    EXPECT_TRUE(scan(dir.path(), Subset::S4, Split::test, opts).ok());
    opts.declared_total = official_total(Subset::S4, Split::test);
    EXPECT_FALSE(scan(dir.path(), Subset::S4, Split::test, opts).ok());
    EXPECT_EQ(official_total(Subset::S4, Split::train), 3452);
    EXPECT_EQ(official_total(Subset::S4, Split::val), 740);
    EXPECT_EQ(official_total(Subset::S4, Split::test), 740);
    EXPECT_EQ(official_total(Subset::MS3, Split::train), 296);
    EXPECT_EQ(official_total(Subset::MS3, Split::val), 64);
    EXPECT_EQ(official_total(Subset::MS3, Split::test), 64);
}

TEST(Scan, ManifestIsByteStable) {
    test::TempDir dir;
    make_synthetic(dir.path(), small(Subset::MS3, Split::val, 3, 2));
    ScanOptions opts;
    opts.sample_rate = 200;
    write_manifest(dir / "a.json", scan(dir.path(), Subset::MS3, Split::val, opts).manifest);
    write_manifest(dir / "b.json", scan(dir.path(), Subset::MS3, Split::val, opts).manifest);
    EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
    const DatasetManifest m = read_manifest(dir / "a.json");
    EXPECT_EQ(to_json(m).dump(), to_json(scan(dir.path(), Subset::MS3, Split::val, opts).manifest).dump());
    EXPECT_EQ(Json::parse(slurp(dir / "a.json")).at("manifest_version"), 1);
}

TEST(LoadClip, SyntheticRoundTripIsValidAndBitIdentical) {
    test::TempDir dir;
    const SyntheticConfig cfg = small(Subset::MS3, Split::test, 2, 3);
    const DatasetManifest m = make_synthetic(dir.path(), cfg);
    for (int c = 0; c < 2; ++c) {
        const VideoClip expected = test::synthetic_clip(cfg, c);
        const VideoClip got = load_clip(m, expected.clip_id);
        EXPECT_TRUE(validate_clip(got).empty());
        ASSERT_EQ(got.num_frames(), expected.num_frames());
        EXPECT_EQ(got.category, expected.category);
        for (int t = 0; t < got.num_frames(); ++t) {
            EXPECT_TRUE(std::equal(got.frames[t].bytes().begin(), got.frames[t].bytes().end(),
                                   expected.frames[t].bytes().begin()));
            EXPECT_EQ(got.audio[t].samples, expected.audio[t].samples);
            EXPECT_EQ(got.ground_truth->masks[t], expected.ground_truth->masks[t]);
        }
    }
}

TEST(LoadClip, WriteClipRoundTripsArbitraryClip) {
    test::TempDir dir;
    SplitMix rng(12);
    VideoClip clip;
    clip.clip_id = "rt";
    clip.subset = Subset::S4;
    clip.split = Split::train;
    MaskSet gt;
    for (int t = 0; t < 2; ++t) {
        std::vector<std::uint8_t> bytes(3 * 5 * 7);
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(256));
        clip.frames.emplace_back(5, 7, bytes, t + 1);
        AudioSegment a{std::vector<float>(50), 50, t + 1};
        for (auto& s : a.samples) s = static_cast<float>(rng.uniform(-1.0, 1.0));
        clip.audio.push_back(a);
    }
    gt.masks.push_back(test::mask_from_bits(0x5a5a5a5, 5, 7));
    gt.frame_indices.push_back(1);
    clip.ground_truth = gt;
    ASSERT_TRUE(validate_clip(clip).empty());
    const ManifestEntry e = write_clip(dir.path(), clip);
    DatasetManifest m;
    m.root = dir.path().string();
    m.subset = Subset::S4;
    m.split = Split::train;
    m.sample_rate = 50;
    m.entries.push_back(e);
    const VideoClip back = load_clip(m, "rt");
    EXPECT_TRUE(validate_clip(back).empty());
    for (int t = 0; t < 2; ++t) {
        EXPECT_TRUE(std::equal(back.frames[t].bytes().begin(), back.frames[t].bytes().end(),
                               clip.frames[t].bytes().begin()));
        EXPECT_EQ(back.audio[t].samples, clip.audio[t].samples);
    }
    EXPECT_EQ(back.ground_truth->masks[0], gt.masks[0]);
    EXPECT_EQ(back.ground_truth->frame_indices, std::vector<int>{1});
}

TEST(LoadClip, GrayMaskValueIsRejected) {
    test::TempDir dir;
    const DatasetManifest m = make_synthetic(dir.path(), small(Subset::S4, Split::train, 1, 1));
    const fs::path p = dir.path() / m.entries[0].masks[0];
    RasterImage img = read_png(p);
    img.pixels[0] = 128;
    write_png(p, img);
    try {
        load_clip(m, "clip_0000");
        FAIL() << "expected MediaError";
    } catch (const MediaError& e) {
        EXPECT_NE(std::string(e.what()).find("00001.png"), std::string::npos);
    }
}

TEST(LoadClip, DoubleRateAudioIsResampled) {
    test::TempDir dir;
    const DatasetManifest m = make_synthetic(dir.path(), small(Subset::S4, Split::train, 1, 2));
    for (const auto& a : m.entries[0].audio) {
        std::vector<float> s(2 * m.sample_rate);
        for (std::size_t i = 0; i < s.size(); ++i)
            s[i] = static_cast<float>(0.5 * std::sin(2.0 * std::numbers::pi * 5.0 * i / (2.0 * m.sample_rate)));
        write_wav(dir.path() / a, s, 2 * m.sample_rate);
    }
    const VideoClip c = load_clip(m, "clip_0000");
    for (const auto& a : c.audio) EXPECT_EQ(a.samples.size(), static_cast<std::size_t>(m.sample_rate));
}

TEST(LoadClip, SingleLongAudioFileIsSplitPerSecond) {
    test::TempDir dir;
    DatasetManifest m = make_synthetic(dir.path(), small(Subset::S4, Split::train, 1, 3));
    const VideoClip original = load_clip(m, "clip_0000");
    std::vector<float> all;
    for (const auto& a : original.audio) all.insert(all.end(), a.samples.begin(), a.samples.end());
    for (const auto& a : m.entries[0].audio) fs::remove(dir.path() / a);
    write_wav(dir / "S4/train/clip_0000/audio/full.wav", all, m.sample_rate);
    ScanOptions opts;
    opts.sample_rate = m.sample_rate;
    m = scan(dir.path(), Subset::S4, Split::train, opts).manifest;
    ASSERT_EQ(m.entries.size(), 1u);
    const VideoClip c = load_clip(m, "clip_0000");
    for (int t = 0; t < 3; ++t) EXPECT_EQ(c.audio[t].samples, original.audio[t].samples);
}

TEST(Synthetic, DeterministicByteTrees) {
    test::TempDir a, b;
    SyntheticConfig cfg = small(Subset::S4, Split::train);
    cfg.seed = 7;
    make_synthetic(a.path(), cfg);
    make_synthetic(b.path(), cfg);
    auto ta = tree_bytes(a.path()), tb = tree_bytes(b.path());
    // The manifest records the absolute root; compare it with the root stripped.
    const std::string key = "S4_train.manifest.json";
    Json ma = Json::parse(ta.at(key)), mb = Json::parse(tb.at(key));
    ma.erase("root");
    mb.erase("root");
    EXPECT_EQ(ma, mb);
    ta.erase(key);
    tb.erase(key);
    EXPECT_EQ(ta, tb);
}

TEST(Synthetic, ConventionsAndSelfOracle) {
    const SyntheticConfig cfg = small(Subset::MS3, Split::test, 2, 3);
    const auto specs = describe_synthetic(cfg);
    std::vector<VideoClip> clips;
    std::vector<MaskSet> perfect;
    for (int c = 0; c < 2; ++c) {
        clips.push_back(test::synthetic_clip(cfg, c));
        perfect.push_back(*clips.back().ground_truth);
        for (int t = 0; t < 3; ++t)
            EXPECT_EQ(frame_iou(clips.back().ground_truth->masks[t], render_mask(specs[c], t, 16, 16)), 1.0);
    }
    const MetricsReport r = evaluate(perfect, clips);
    EXPECT_EQ(r.m_j, 100.0);
    EXPECT_EQ(r.m_f, 1.0);
    int sounding = 0;
    for (const auto& o : specs[0].objects) sounding += o.sounding;
    EXPECT_EQ(sounding, 2);
}

TEST(Synthetic, DistractorIsVisibleButUnmasked) {
    SyntheticConfig cfg = small(Subset::S4, Split::test, 1, 1);
    cfg.silent_distractor = true;
    const auto spec = describe_synthetic(cfg).at(0);
    ASSERT_EQ(spec.objects.size(), 2u);
    EXPECT_FALSE(spec.objects[0].sounding);
    EXPECT_TRUE(spec.objects[1].sounding);
}

}  // namespace
}  // namespace av2t
