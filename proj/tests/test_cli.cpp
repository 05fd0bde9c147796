#include "cli.hpp"

#include "av2t/media_io.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

namespace av2t {
namespace {
namespace fs = std::filesystem;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "av2t");
    ::testing::internal::CaptureStdout();
    ::testing::internal::CaptureStderr();
    const int code = cli::run(args);
    Outcome o{code, ::testing::internal::GetCapturedStdout(), ::testing::internal::GetCapturedStderr()};
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

const std::vector<std::string> kFastTrain = {"--set", "train.input_resolution=8", "--set", "train.epochs=2",
                                             "--set", "train.optimizer.lr=0.01",  "--set", "train.batch_size=1"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override {
        for (const auto& [subset, split] : {std::pair{"S4", "train"}, std::pair{"S4", "test"}}) {
            const Outcome o = run_cli({"synth", "--root", data().string(), "--subset", subset, "--split", split,
                                       "--clips", "2", "--frames", "2", "--height", "12", "--width", "16",
                                       "--sample-rate", "400"});
            ASSERT_EQ(o.code, 0) << o.err;
        }
    }
    fs::path data() const { return dir.path() / "data"; }
    fs::path manifest(const std::string& split) const { return data() / ("S4_" + split + ".manifest.json"); }

    fs::path trained_checkpoint() {
        const fs::path run = dir / "run";
        if (!fs::exists(run / "last.ckpt")) {
            const Outcome o = run_cli(with({"train", "--manifest", manifest("train").string(), "--out", run.string()},
                                           kFastTrain));
            EXPECT_EQ(o.code, 0) << o.err;
        }
        return run / "last.ckpt";
    }

    test::TempDir dir;
};

TEST_F(CliTest, HelpAndUsageErrors) {
    EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
    EXPECT_EQ(run_cli({}).code, cli::kExitInvalid);
    EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitInvalid);
    EXPECT_EQ(run_cli({"train", "--manifest", manifest("train").string()}).code, cli::kExitInvalid);
    const Outcome bad = run_cli(
        with({"train", "--manifest", manifest("train").string(), "--out", (dir / "x").string(), "--set", "train.nope=1"},
             {}));
    EXPECT_EQ(bad.code, cli::kExitInvalid);
    EXPECT_NE(bad.err.find("train.nope"), std::string::npos);
}

TEST_F(CliTest, MissingInputsExitTwoAndNamePath) {
    const std::string ghost = (dir / "ghost.json").string();
    Outcome o = run_cli({"train", "--manifest", ghost, "--out", (dir / "r").string()});
    EXPECT_EQ(o.code, cli::kExitMissing);
    EXPECT_NE(o.err.find(ghost), std::string::npos);
    o = run_cli({"ingest", "--root", (dir / "nowhere").string(), "--subset", "S4", "--split", "train"});
    EXPECT_EQ(o.code, cli::kExitMissing);
    o = run_cli({"eval", "--checkpoint", (dir / "none.ckpt").string(), "--manifest", manifest("test").string(), "--out",
                 (dir / "e").string()});
    EXPECT_EQ(o.code, cli::kExitMissing);
}

TEST_F(CliTest, IngestWritesManifestAndRunManifest) {
    fs::remove(manifest("train"));
    const Outcome o = run_cli({"ingest", "--root", data().string(), "--subset", "S4", "--split", "train", "--sample-rate",
                               "400", "--declared-total", "2"});
    EXPECT_EQ(o.code, cli::kExitOk) << o.err;
    EXPECT_TRUE(fs::exists(manifest("train")));
    EXPECT_EQ(read_manifest(manifest("train")).entries.size(), 2u);
    const Json rm = Json::parse(slurp(data() / "runs/ingest_S4_train/run_manifest.json"));
    EXPECT_EQ(rm.at("status"), "ok");
    EXPECT_EQ(rm.at("command"), "ingest");
}

TEST_F(CliTest, IngestReportsViolationsAndExitsOne) {
    // Annotate every frame of a train clip.
    fs::copy_file(data() / "S4/train/clip_0000/masks/00001.png", data() / "S4/train/clip_0000/masks/00002.png");
    fs::remove(manifest("train"));
    const Outcome o = run_cli({"ingest", "--root", data().string(), "--subset", "S4", "--split", "train"});
    EXPECT_EQ(o.code, cli::kExitInvalid);
    EXPECT_NE(o.err.find("clip_0000"), std::string::npos);
    EXPECT_NE(o.err.find("annotation convention violated"), std::string::npos);
    EXPECT_FALSE(fs::exists(manifest("train")));
    const Outcome off = run_cli({"ingest", "--root", data().string(), "--subset", "S4", "--split", "test", "--official"});
    EXPECT_EQ(off.code, cli::kExitInvalid);
    EXPECT_NE(off.err.find("740"), std::string::npos);
}

TEST_F(CliTest, InferWritesMasksOverlaysAndRespectsThreshold) {
    const fs::path ckpt = trained_checkpoint();
    const fs::path out_lo = dir / "inf_lo", out_hi = dir / "inf_hi";
    Outcome o = run_cli({"infer", "--checkpoint", ckpt.string(), "--clip", (data() / "S4/test/clip_0001").string(),
                         "--out", out_lo.string(), "--overlay", "--threshold", "0.5"});
    ASSERT_EQ(o.code, 0) << o.err;
    o = run_cli({"infer", "--checkpoint", ckpt.string(), "--clip", (data() / "S4/test/clip_0001").string(), "--out",
                 out_hi.string(), "--threshold", "0.9"});
    ASSERT_EQ(o.code, 0) << o.err;
    for (int t = 1; t <= 2; ++t) {
        const std::string name = fmt::format("{:05d}.png", t);
        const RasterImage lo = read_png(out_lo / "clip_0001/masks" / name);
        const RasterImage hi = read_png(out_hi / "clip_0001/masks" / name);
        const RasterImage frame = read_png(data() / "S4/test/clip_0001/frames" / name);
        EXPECT_EQ(lo.width, frame.width);
        EXPECT_EQ(lo.height, frame.height);
        EXPECT_EQ(lo.channels, 1);
        long area_lo = 0, area_hi = 0;
        for (std::size_t i = 0; i < lo.pixels.size(); ++i) {
            EXPECT_TRUE(lo.pixels[i] == 0 || lo.pixels[i] == 255);
            area_lo += lo.pixels[i] == 255;
            area_hi += hi.pixels[i] == 255;
        }
        EXPECT_LE(area_hi, area_lo);
        const RasterImage ov = read_png(out_lo / "clip_0001/overlays" / name);
        EXPECT_EQ(ov.width, frame.width);
        EXPECT_EQ(ov.channels, 3);
    }
    EXPECT_FALSE(fs::exists(out_hi / "clip_0001/overlays"));
    EXPECT_EQ(run_cli({"infer", "--checkpoint", ckpt.string(), "--out", out_hi.string()}).code, cli::kExitInvalid);
    o = run_cli({"infer", "--checkpoint", ckpt.string(), "--manifest", manifest("test").string(), "--out",
                 (dir / "inf_all").string()});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_TRUE(fs::exists(dir / "inf_all/clip_0000/masks/00002.png"));
}

TEST_F(CliTest, EvalWritesMetricsAndRejectsPartialAnnotation) {
    const fs::path ckpt = trained_checkpoint();
    Outcome o = run_cli({"eval", "--checkpoint", ckpt.string(), "--manifest", manifest("test").string(), "--out",
                         (dir / "ev").string(), "--beta2", "0.3"});
    ASSERT_EQ(o.code, 0) << o.err;
    const Json m = Json::parse(slurp(dir / "ev/metrics.json"));
    EXPECT_EQ(m.at("beta2").get<double>(), 0.3);
    EXPECT_GE(m.at("m_j").get<double>(), 0.0);
    EXPECT_NE(o.out.find("M_J"), std::string::npos);
    o = run_cli({"eval", "--checkpoint", ckpt.string(), "--manifest", manifest("train").string(), "--out",
                 (dir / "ev2").string()});
    EXPECT_EQ(o.code, cli::kExitInvalid);
}

TEST_F(CliTest, TrainingIsReproducibleExceptTimestamp) {
    auto once = [&] {
        const fs::path run = dir / "repro";
        const Outcome o = run_cli(
            with({"train", "--manifest", manifest("train").string(), "--out", run.string(), "--seed", "3"}, kFastTrain));
        EXPECT_EQ(o.code, 0) << o.err;
        Json rm = Json::parse(slurp(run / "run_manifest.json"));
        rm.erase("created_at");
        return std::tuple{slurp(run / "last.ckpt"), slurp(run / "loss.csv"), rm.dump()};
    };
    const auto a = once();
    const auto b = once();
    EXPECT_EQ(std::get<0>(a), std::get<0>(b));
    EXPECT_EQ(std::get<1>(a), std::get<1>(b));
    EXPECT_EQ(std::get<2>(a), std::get<2>(b));
}

TEST_F(CliTest, AblateBuildsFullGridWithFootnotes) {
    const Outcome o = run_cli(with({"ablate", "--train", manifest("train").string(), "--eval", manifest("test").string(),
                                    "--out", (dir / "ab").string(), "--train-all"},
                                   kFastTrain));
    ASSERT_EQ(o.code, 0) << o.err;
    std::istringstream grid(slurp(dir / "ab/ablation_grid.tsv"));
    std::string line;
    std::getline(grid, line);
    EXPECT_EQ(line, "subset\tprompt_source\tadapter\tm_j\tm_f\tref");
    int rows = 0, footnotes = 0, bias = 0;
    std::map<std::string, std::string> refs;
    while (std::getline(grid, line)) {
        if (line.rfind("# vision_bias", 0) == 0) {
            ++bias;
        } else if (line.rfind("# [", 0) == 0) {
            ++footnotes;
        } else if (line[0] != '#') {
            ++rows;
            std::vector<std::string> cells;
            std::istringstream ls(line);
            for (std::string c; std::getline(ls, c, '\t');) cells.push_back(c);
            ASSERT_EQ(cells.size(), 6u) << line;
            for (const auto& c : cells) EXPECT_FALSE(c.empty());
            refs[cells[1] + "/" + cells[2]] = cells[5];
        }
    }
    EXPECT_EQ(rows, 6);
    EXPECT_EQ(bias, 2);
    EXPECT_EQ(footnotes, 5);
    EXPECT_EQ(refs.at("fused/on"), "[3]");
    EXPECT_EQ(refs.at("clip_only/on"), "[1]");
    EXPECT_EQ(refs.at("clap_only/on"), "[2]");
    EXPECT_EQ(refs.at("fused/off"), "[4]");
    for (const char* k : {"S4_fused_adapter-on", "S4_clip_only_adapter-off", "S4_clap_only_adapter-on"})
        EXPECT_TRUE(fs::exists(dir / "ab/reports" / (std::string(k) + ".json"))) << k;
    const Json rm = Json::parse(slurp(dir / "ab/run_manifest.json"));
    EXPECT_EQ(rm.at("vision_bias").size(), 2u);
    EXPECT_EQ(rm.at("reports").size(), 6u);

    // Re-scoring existing checkpoints without training gives the same grid.
    const Outcome again = run_cli({"ablate", "--eval", manifest("test").string(), "--out", (dir / "ab2").string(),
                                   "--checkpoints", (dir / "ab/checkpoints").string()});
    ASSERT_EQ(again.code, 0) << again.err;
    EXPECT_EQ(slurp(dir / "ab2/ablation_grid.tsv"), slurp(dir / "ab/ablation_grid.tsv"));
}

TEST_F(CliTest, AblateNamesMissingCheckpoint) {
    const Outcome o = run_cli({"ablate", "--eval", manifest("test").string(), "--out", (dir / "ab").string(),
                               "--checkpoints", (dir / "empty").string(), "--arms", "fused", "--adapters", "on"});
    EXPECT_EQ(o.code, cli::kExitMissing);
    EXPECT_NE(o.err.find((dir / "empty/S4/fused_adapter-on/last.ckpt").string()), std::string::npos);
}

TEST(VisionBias, FlagsWhenFusedDoesNotBeatClipByMargin) {
    using cli::AblationRow;
    const std::vector<AblationRow> rows = {
        {Subset::S4, PromptSource::clip_only, true, 80.0, 0.8},  {Subset::S4, PromptSource::fused, true, 80.5, 0.8},
        {Subset::S4, PromptSource::clip_only, false, 70.0, 0.7}, {Subset::S4, PromptSource::fused, false, 75.0, 0.7},
        {Subset::MS3, PromptSource::clap_only, true, 50.0, 0.5},
    };
    const auto b = cli::vision_bias(rows, 1.0);
    ASSERT_EQ(b.size(), 2u);
    EXPECT_TRUE(b[0].adapter);
    EXPECT_DOUBLE_EQ(b[0].delta, 0.5);
    EXPECT_TRUE(b[0].flagged);
    EXPECT_FALSE(b[1].flagged);
    EXPECT_DOUBLE_EQ(b[1].delta, 5.0);
    EXPECT_TRUE(cli::vision_bias(rows, 6.0)[1].flagged);
}

TEST(Grid, ReferenceMarkersAndFootnotes) {
    EXPECT_EQ(cli::reference_marker(PromptSource::clip_only, false), "-");
    EXPECT_EQ(cli::reference_marker(PromptSource::fused, false), "[4]");
    const auto notes = cli::reference_footnotes();
    EXPECT_NE(notes[0].find("86.29"), std::string::npos);
    EXPECT_NE(notes[2].find("86.67"), std::string::npos);
    EXPECT_NE(notes[2].find("69.65"), std::string::npos);
    EXPECT_EQ(cli::arm_checkpoint("c", Subset::MS3, PromptSource::clap_only, false),
              fs::path("c/MS3/clap_only_adapter-off/last.ckpt"));
}

}  // namespace
}  // namespace av2t
