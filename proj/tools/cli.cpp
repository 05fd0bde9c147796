#include "cli.hpp"

#include "av2t/media_io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <iostream>

namespace av2t::cli {
namespace fs = std::filesystem;

namespace {

/// Input that must exist on disk is absent; maps to exit code 2.
class MissingFile : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

void require_exists(const fs::path& p, std::string_view what) {
    if (!fs::exists(p)) throw MissingFile(fmt::format("{} {} does not exist", what, p.string()));
}

struct ModelFlags {
    std::optional<std::string> config;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::string backend = "stub";
    std::optional<std::string> prompt_source;
    std::optional<std::string> adapter;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "Layered JSON config file");
        app->add_option("--set", sets, "Override a config key (dotted.key=value); repeatable");
        app->add_option("--seed", seed, "Run seed (train.seed)");
        app->add_option("--backend", backend, "Encoder suite")->check(CLI::IsMember({"stub", "pretrained"}));
        app->add_option("--prompt-source", prompt_source, "Prompt feature arm")
            ->check(CLI::IsMember({"fused", "clip-only", "clap-only", "clip_only", "clap_only"}));
        app->add_option("--adapter", adapter, "Adapter injection")->check(CLI::IsMember({"on", "off"}));
    }

    ResolvedConfig resolve_config() const {
        std::optional<fs::path> file;
        if (config) {
            require_exists(*config, "config file");
            file = *config;
        }
        std::vector<std::string> all = sets;
        if (seed) all.push_back(fmt::format("train.seed={}", *seed));
        if (prompt_source)
            all.push_back(fmt::format("train.prompt_source={}", to_string(parse_prompt_source(*prompt_source))));
        if (adapter) all.push_back(fmt::format("train.adapter_enabled={}", *adapter == "on"));
        return load_config(parse_backend_kind(backend), file, all);
    }
};

Json base_run_manifest(std::string_view command, const std::vector<std::string>& args) {
    return {{"command", command}, {"args", args}, {"code_version", kCodeVersion}};
}

void finish_run_manifest(const fs::path& dir, Json manifest) {
    manifest["created_at"] = utc_timestamp();
    write_text_file(dir / "run_manifest.json", manifest.dump(2) + "\n");
}

DatasetManifest open_manifest(const fs::path& path) {
    require_exists(path, "manifest");
    return read_manifest(path);
}

std::vector<fs::path> sorted_files(const fs::path& dir, std::string_view ext) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

/// Wraps a bare clip directory (frames/, audio/) as a one-entry manifest.
DatasetManifest clip_dir_manifest(const fs::path& clip_dir) {
    require_exists(clip_dir, "clip directory");
    const fs::path dir = fs::absolute(clip_dir).lexically_normal();
    DatasetManifest m;
    m.root = dir.parent_path().string();
    m.subset = Subset::S4;
    m.split = Split::test;
    ManifestEntry e;
    e.clip_id = dir.filename().string();
    for (const auto& p : sorted_files(dir / m.layout.frames_dir, ".png"))
        e.frames.push_back(p.lexically_relative(m.root).generic_string());
    const auto audio = sorted_files(dir / m.layout.audio_dir, ".wav");
    for (const auto& p : audio) e.audio.push_back(p.lexically_relative(m.root).generic_string());
    if (e.frames.empty() || audio.empty())
        throw std::invalid_argument(fmt::format("{}: clip needs frames/*.png and audio/*.wav", dir.string()));
    m.sample_rate = read_wav(audio.front()).sample_rate;
    m.entries.push_back(std::move(e));
    return m;
}

RasterImage mask_raster(const Matrix& bin) {
    RasterImage img{static_cast<int>(bin.cols()), static_cast<int>(bin.rows()), 1, {}};
    img.pixels.resize(static_cast<std::size_t>(bin.size()));
    for (Eigen::Index y = 0; y < bin.rows(); ++y)
        for (Eigen::Index x = 0; x < bin.cols(); ++x)
            img.pixels[static_cast<std::size_t>(y * bin.cols() + x)] = bin(y, x) > 0.5 ? 255 : 0;
    return img;
}

RasterImage overlay_raster(const Frame& f, const Matrix& bin) {
    constexpr double alpha = 0.5;
    constexpr std::array<double, 3> tint = {255.0, 0.0, 0.0};
    RasterImage img{f.width(), f.height(), 3, {}};
    img.pixels.resize(static_cast<std::size_t>(f.width()) * f.height() * 3);
    for (int y = 0; y < f.height(); ++y)
        for (int x = 0; x < f.width(); ++x)
            for (int c = 0; c < 3; ++c) {
                double v = f.byte_at(c, y, x);
                if (bin(y, x) > 0.5) v = (1.0 - alpha) * v + alpha * tint[c];
                img.pixels[(static_cast<std::size_t>(y) * f.width() + x) * 3 + c] =
                    static_cast<std::uint8_t>(std::lround(v));
            }
    return img;
}

// Commands -------------------------------------------------------------------

struct IngestArgs {
    std::string root, subset, split;
    int sample_rate = 16000;
    std::optional<int> declared_total;
    bool official = false;
    std::optional<std::string> manifest, out;
};

int cmd_ingest(const IngestArgs& a, const std::vector<std::string>& args) {
    require_exists(a.root, "dataset root");
    const Subset subset = parse_subset(a.subset);
    const Split split = parse_split(a.split);
    ScanOptions opts;
    opts.sample_rate = a.sample_rate;
    opts.declared_total = a.official ? std::optional<int>(official_total(subset, split)) : a.declared_total;
    const ScanResult r = scan(a.root, subset, split, opts);
    const fs::path manifest_path = a.manifest ? fs::path(*a.manifest) : default_manifest_path(a.root, subset, split);

    std::cout << fmt::format("{}/{}: {} valid clips (official total {})\n", to_string(subset), to_string(split),
                             r.manifest.entries.size(), official_total(subset, split));
    for (const auto& e : r.errors) std::cerr << "violation: " << e << "\n";

    Json rm = base_run_manifest("ingest", args);
    rm["status"] = r.ok() ? "ok" : "failed";
    rm["clips"] = r.manifest.entries.size();
    rm["errors"] = r.errors;
    if (r.ok()) {
        write_manifest(manifest_path, r.manifest);
        rm["manifest"] = fs::absolute(manifest_path).lexically_normal().string();
    }
    const fs::path out = a.out ? fs::path(*a.out)
                               : fs::path(a.root) / "runs" / fmt::format("ingest_{}_{}", to_string(subset), to_string(split));
    finish_run_manifest(out, rm);
    return r.ok() ? kExitOk : kExitInvalid;
}

struct SynthArgs {
    std::string root;
    SyntheticConfig cfg;
    std::string subset = "S4", split = "train";
    std::optional<std::string> out;
};

int cmd_synth(SynthArgs a, const std::vector<std::string>& args) {
    a.cfg.subset = parse_subset(a.subset);
    a.cfg.split = parse_split(a.split);
    const DatasetManifest m = make_synthetic(a.root, a.cfg);
    const fs::path manifest_path = default_manifest_path(a.root, a.cfg.subset, a.cfg.split);
    std::cout << fmt::format("wrote {} clips to {}\n", m.entries.size(), manifest_path.string());
    Json rm = base_run_manifest("synth", args);
    rm["status"] = "ok";
    rm["seed"] = a.cfg.seed;
    rm["manifest"] = fs::absolute(manifest_path).lexically_normal().string();
    const fs::path out =
        a.out ? fs::path(*a.out)
              : fs::path(a.root) / "runs" / fmt::format("synth_{}_{}", to_string(a.cfg.subset), to_string(a.cfg.split));
    finish_run_manifest(out, rm);
    return kExitOk;
}

struct TrainArgs {
    ModelFlags model;
    std::string manifest, out;
};

int cmd_train(const TrainArgs& a, const std::vector<std::string>& args) {
    const DatasetManifest m = open_manifest(a.manifest);
    const ResolvedConfig rc = a.model.resolve_config();
    const Backend backend(rc.run.backend);
    fs::create_directories(a.out);
    TrainResult r = train(m, rc.run, backend, fs::path(a.out));
    r.run_manifest["args"] = args;
    r.run_manifest["status"] = "ok";
    r.run_manifest["dataset"] = {{"manifest", fs::absolute(a.manifest).lexically_normal().string()},
                                 {"subset", to_string(m.subset)},
                                 {"split", to_string(m.split)}};
    write_text_file(fs::path(a.out) / "run_manifest.json", r.run_manifest.dump(2) + "\n");
    std::cout << fmt::format("trained {} steps, final loss {:.6f}, checkpoint {}\n", r.state.step,
                             r.curve.empty() ? 0.0 : r.curve.back().loss.total,
                             (fs::path(a.out) / "last.ckpt").string());
    return kExitOk;
}

struct InferArgs {
    std::string checkpoint, out;
    std::optional<std::string> clip, manifest, clip_id;
    std::optional<double> threshold;
    bool overlay = false;
};

int cmd_infer(const InferArgs& a, const std::vector<std::string>& args) {
    if (a.clip.has_value() == a.manifest.has_value())
        throw std::invalid_argument("infer: pass exactly one of --clip or --manifest");
    require_exists(a.checkpoint, "checkpoint");
    const ModelState state = load_checkpoint(a.checkpoint);
    const DatasetManifest m = a.clip ? clip_dir_manifest(*a.clip) : open_manifest(*a.manifest);
    const double threshold = a.threshold.value_or(state.config.train.threshold);
    const Backend backend(state.config.backend);

    std::vector<std::string> ids;
    if (a.clip_id)
        ids.push_back(*a.clip_id);
    else
        for (const auto& e : m.entries) ids.push_back(e.clip_id);

    Json written = Json::array();
    for (const auto& id : ids) {
        const VideoClip clip = load_clip(m, id);
        const MaskSet soft = infer_clip(clip, state, backend);
        for (std::size_t i = 0; i < soft.masks.size(); ++i) {
            const Matrix bin = binarize(soft.masks[i], threshold);
            const std::string name = fmt::format("{:05d}.png", soft.frame_indices[i]);
            write_png(fs::path(a.out) / id / "masks" / name, mask_raster(bin));
            if (a.overlay) write_png(fs::path(a.out) / id / "overlays" / name, overlay_raster(clip.frames[i], bin));
        }
        written.push_back({{"clip_id", id}, {"frames", soft.masks.size()}});
    }
    Json rm = base_run_manifest("infer", args);
    rm["status"] = "ok";
    rm["threshold"] = threshold;
    rm["overlay"] = a.overlay;
    rm["clips"] = written;
    rm["provenance"] = provenance(state);
    finish_run_manifest(a.out, rm);
    std::cout << fmt::format("wrote masks for {} clips to {}\n", ids.size(), a.out);
    return kExitOk;
}

struct EvalArgs {
    std::string checkpoint, manifest, out;
    std::optional<double> threshold, beta2;
};

int cmd_eval(const EvalArgs& a, const std::vector<std::string>& args) {
    require_exists(a.checkpoint, "checkpoint");
    const DatasetManifest m = open_manifest(a.manifest);
    const ModelState state = load_checkpoint(a.checkpoint);
    const Backend backend(state.config.backend);
    const MetricsReport r = evaluate_run(a.checkpoint, m, backend, a.threshold, a.beta2);
    write_text_file(fs::path(a.out) / "metrics.json", to_json(r).dump(2) + "\n");
    Json rm = base_run_manifest("eval", args);
    rm["status"] = "ok";
    rm["m_j"] = r.m_j;
    rm["m_f"] = r.m_f;
    rm["provenance"] = r.provenance;
    finish_run_manifest(a.out, rm);
    std::cout << fmt::format("M_J {:.2f}  M_F {:.3f}\n", r.m_j, r.m_f);
    return kExitOk;
}

struct AblateArgs {
    ModelFlags model;
    std::vector<std::string> train_manifests, eval_manifests;
    std::string out;
    std::optional<std::string> checkpoints;
    std::string adapters = "both";
    std::vector<std::string> arms = {"clip_only", "clap_only", "fused"};
    bool train_all = false;
};

int cmd_ablate(const AblateArgs& a, const std::vector<std::string>& args) {
    if (a.eval_manifests.empty()) throw std::invalid_argument("ablate: at least one --eval manifest is required");
    const ResolvedConfig base = a.model.resolve_config();
    const fs::path ckpt_dir = a.checkpoints ? fs::path(*a.checkpoints) : fs::path(a.out) / "checkpoints";
    std::vector<bool> adapter_modes;
    if (a.adapters != "off") adapter_modes.push_back(true);
    if (a.adapters != "on") adapter_modes.push_back(false);
    std::vector<PromptSource> arms;
    for (const auto& s : a.arms) arms.push_back(parse_prompt_source(s));

    std::map<Subset, DatasetManifest> train_sets;
    for (const auto& p : a.train_manifests) {
        DatasetManifest m = open_manifest(p);
        train_sets.emplace(m.subset, std::move(m));
    }

    const Backend backend(base.run.backend);
    std::vector<AblationRow> rows;
    Json reports = Json::array();
    for (const auto& ep : a.eval_manifests) {
        const DatasetManifest em = open_manifest(ep);
        for (const PromptSource arm : arms)
            for (const bool adapter : adapter_modes) {
                const fs::path ckpt = arm_checkpoint(ckpt_dir, em.subset, arm, adapter);
                if (a.train_all) {
                    const auto it = train_sets.find(em.subset);
                    if (it == train_sets.end())
                        throw MissingFile(fmt::format("ablate: no --train manifest for subset {}", to_string(em.subset)));
                    RunConfig rc = base.run;
                    rc.train.prompt_source = arm;
                    rc.train.adapter_enabled = adapter;
                    std::cout << fmt::format("training {} {} adapter-{}\n", to_string(em.subset), to_string(arm),
                                             adapter ? "on" : "off");
                    train(it->second, rc, backend, ckpt.parent_path());
                } else if (!fs::exists(ckpt)) {
                    throw MissingFile(fmt::format("ablate: missing checkpoint for arm {} adapter-{} ({}): {}",
                                                  to_string(arm), adapter ? "on" : "off", to_string(em.subset),
                                                  ckpt.string()));
                }
                const MetricsReport r = evaluate_run(ckpt, em, backend);
                const std::string key =
                    fmt::format("{}_{}_adapter-{}", to_string(em.subset), to_string(arm), adapter ? "on" : "off");
                const fs::path report_path = fs::path(a.out) / "reports" / (key + ".json");
                write_text_file(report_path, to_json(r).dump(2) + "\n");
                rows.push_back({em.subset, arm, adapter, r.m_j, r.m_f});
                reports.push_back({{"key", key}, {"report", report_path.string()}, {"m_j", r.m_j}, {"m_f", r.m_f}});
            }
    }
    const auto bias = vision_bias(rows, base.ablate.margin);
    const std::string grid = render_grid_tsv(rows, bias);
    write_text_file(fs::path(a.out) / "ablation_grid.tsv", grid);
    std::cout << grid;

    Json rm = base_run_manifest("ablate", args);
    rm["status"] = "ok";
    rm["seed"] = base.run.train.seed;
    rm["config"] = base.document;
    rm["reports"] = reports;
    Json vb = Json::array();
    for (const auto& b : bias)
        vb.push_back({{"subset", to_string(b.subset)},
                      {"adapter", b.adapter},
                      {"delta_m_j", b.delta},
                      {"margin", b.margin},
                      {"flagged", b.flagged}});
    rm["vision_bias"] = vb;
    finish_run_manifest(a.out, rm);
    return kExitOk;
}

}  // namespace

// Ablation reporting ----------------------------------------------------------

std::vector<VisionBias> vision_bias(const std::vector<AblationRow>& rows, double margin) {
    std::vector<VisionBias> out;
    for (const auto& fused : rows) {
        if (fused.arm != PromptSource::fused) continue;
        for (const auto& clip : rows) {
            if (clip.arm != PromptSource::clip_only || clip.subset != fused.subset || clip.adapter != fused.adapter)
                continue;
            const double delta = fused.m_j - clip.m_j;
            out.push_back({fused.subset, fused.adapter, delta, margin, delta <= margin});
        }
    }
    return out;
}

std::string reference_marker(PromptSource arm, bool adapter) {
    if (!adapter) return arm == PromptSource::fused ? "[4]" : "-";
    switch (arm) {
        case PromptSource::clip_only: return "[1]";
        case PromptSource::clap_only: return "[2]";
        case PromptSource::fused: return "[3]";
    }
    return "-";
}

std::vector<std::string> reference_footnotes() {
    return {
        "[1] reference (full scale, pretrained SAM2 suite): CLIP prompt, adapter on: M_J 86.29 S4 / 64.23 MS3, "
        "M_F 0.920 / 0.738",
        "[2] reference (full scale, pretrained SAM2 suite): CLAP prompt, adapter on: M_J 85.67 S4 / 68.15 MS3, "
        "M_F 0.915 / 0.743",
        "[3] reference (full scale, pretrained SAM2 suite): fused prompt, adapter on: M_J 86.67 S4 / 69.65 MS3, "
        "M_F 0.924 / 0.777",
        "[4] reference (full scale, pretrained SAM2 suite): fused prompt, adapter off: M_J 85.63 S4 / 64.47 MS3, "
        "M_F 0.920 / 0.704",
        "[5] reference (full scale, pretrained SAM suite): fused prompt, adapter off: M_J 83.11 S4 / 55.81 MS3, "
        "M_F 0.901 / 0.634; adapter on: M_J 85.78 / 65.76, M_F 0.919 / 0.738",
        "reference values are context only; desk-scale synthetic runs are not expected to match them",
    };
}

std::string render_grid_tsv(const std::vector<AblationRow>& rows, const std::vector<VisionBias>& bias) {
    std::string out = "subset\tprompt_source\tadapter\tm_j\tm_f\tref\n";
    for (const auto& r : rows)
        out += fmt::format("{}\t{}\t{}\t{:.2f}\t{:.3f}\t{}\n", to_string(r.subset), to_string(r.arm),
                           r.adapter ? "on" : "off", r.m_j, r.m_f, reference_marker(r.arm, r.adapter));
    for (const auto& b : bias)
        out += fmt::format("# vision_bias {} adapter-{}: fused - clip_only = {:.2f} m_j, margin {:.2f}: {}\n",
                           to_string(b.subset), b.adapter ? "on" : "off", b.delta, b.margin,
                           b.flagged ? "FLAGGED" : "not flagged");
    for (const auto& f : reference_footnotes()) out += "# " + f + "\n";
    return out;
}

fs::path arm_checkpoint(const fs::path& dir, Subset subset, PromptSource arm, bool adapter) {
    return dir / std::string(to_string(subset)) / fmt::format("{}_adapter-{}", to_string(arm), adapter ? "on" : "off") /
           "last.ckpt";
}

// Dispatch ---------------------------------------------------------------------

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
    const std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
    CLI::App app{"Audio-visual segmentation toolkit"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Scan a dataset split and write its manifest");
    c_ingest->add_option("--root", ingest.root, "Dataset root")->required();
    c_ingest->add_option("--subset", ingest.subset, "S4 or MS3")->required();
    c_ingest->add_option("--split", ingest.split, "train, val or test")->required();
    c_ingest->add_option("--sample-rate", ingest.sample_rate, "Audio rate clips are resampled to");
    c_ingest->add_option("--declared-total", ingest.declared_total, "Expected clip count");
    c_ingest->add_flag("--official", ingest.official, "Expect the public split size");
    c_ingest->add_option("--manifest", ingest.manifest, "Manifest path (default <root>/<subset>_<split>.manifest.json)");
    c_ingest->add_option("--out", ingest.out, "Run manifest directory");

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset split");
    c_synth->add_option("--root", synth.root, "Output dataset root")->required();
    c_synth->add_option("--subset", synth.subset, "S4 or MS3");
    c_synth->add_option("--split", synth.split, "train, val or test");
    c_synth->add_option("--clips", synth.cfg.clips, "Number of clips");
    c_synth->add_option("--frames", synth.cfg.frames, "Frames per clip");
    c_synth->add_option("--height", synth.cfg.height, "Frame height");
    c_synth->add_option("--width", synth.cfg.width, "Frame width");
    c_synth->add_option("--sample-rate", synth.cfg.sample_rate, "Audio sample rate");
    c_synth->add_option("--seed", synth.cfg.seed, "Generator seed");
    c_synth->add_flag("--distractor", synth.cfg.silent_distractor, "Add a silent distractor object");
    c_synth->add_option("--out", synth.out, "Run manifest directory");

    TrainArgs tr;
    auto* c_train = app.add_subcommand("train", "Train on a train-split manifest");
    tr.model.attach(c_train);
    c_train->add_option("--manifest", tr.manifest, "Train manifest")->required();
    c_train->add_option("--out", tr.out, "Run directory")->required();

    InferArgs inf;
    auto* c_infer = app.add_subcommand("infer", "Write predicted masks");
    c_infer->add_option("--checkpoint", inf.checkpoint, "Checkpoint file")->required();
    c_infer->add_option("--clip", inf.clip, "Clip directory with frames/ and audio/");
    c_infer->add_option("--manifest", inf.manifest, "Dataset manifest");
    c_infer->add_option("--clip-id", inf.clip_id, "Restrict to one clip of the manifest");
    c_infer->add_option("--out", inf.out, "Output directory")->required();
    c_infer->add_option("--threshold", inf.threshold, "Binarization threshold");
    c_infer->add_flag("--overlay", inf.overlay, "Also write frames blended with the mask");

    EvalArgs ev;
    auto* c_eval = app.add_subcommand("eval", "Score a checkpoint on a fully annotated manifest");
    c_eval->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
    c_eval->add_option("--manifest", ev.manifest, "Evaluation manifest")->required();
    c_eval->add_option("--out", ev.out, "Output directory")->required();
    c_eval->add_option("--threshold", ev.threshold, "Binarization threshold");
    c_eval->add_option("--beta2", ev.beta2, "F-score beta squared");

    AblateArgs ab;
    auto* c_ablate = app.add_subcommand("ablate", "Prompt-source by adapter ablation grid");
    ab.model.attach(c_ablate);
    c_ablate->add_option("--train", ab.train_manifests, "Train manifest per subset (with --train-all)");
    c_ablate->add_option("--eval", ab.eval_manifests, "Evaluation manifest per subset")->required();
    c_ablate->add_option("--out", ab.out, "Output directory")->required();
    c_ablate->add_option("--checkpoints", ab.checkpoints, "Checkpoint root (default <out>/checkpoints)");
    c_ablate->add_option("--adapters", ab.adapters, "Adapter settings to run")->check(CLI::IsMember({"on", "off", "both"}));
    c_ablate->add_option("--arms", ab.arms, "Prompt-source arms to run")->delimiter(',');
    c_ablate->add_flag("--train-all", ab.train_all, "Train every requested arm first");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*c_ingest) return cmd_ingest(ingest, args);
        if (*c_synth) return cmd_synth(synth, args);
        if (*c_train) return cmd_train(tr, args);
        if (*c_infer) return cmd_infer(inf, args);
        if (*c_eval) return cmd_eval(ev, args);
        if (*c_ablate) return cmd_ablate(ab, args);
    } catch (const MissingFile& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMissing;
    } catch (const MissingInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMissing;
    } catch (const BackendUnavailable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMissing;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitInvalid;
}

}  // namespace av2t::cli
