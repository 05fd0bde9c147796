#include "av2t/config.hpp"
#include "av2t/metrics.hpp"
#include "av2t/objectives.hpp"
#include "av2t/pipeline.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace av2t;

VideoClip make_clip(int size, int frames) {
    SyntheticConfig sc;
    sc.subset = Subset::MS3;
    sc.frames = frames;
    sc.height = sc.width = size;
    sc.sample_rate = 16000;
    const SyntheticClipSpec spec = describe_synthetic(sc).at(0);
    VideoClip clip;
    clip.clip_id = spec.clip_id;
    clip.subset = sc.subset;
    clip.split = sc.split;
    MaskSet gt;
    for (int t = 0; t < frames; ++t) {
        clip.frames.push_back(render_frame(spec, t, size, size));
        clip.audio.push_back(render_audio(spec, t, sc.sample_rate));
        gt.masks.push_back(render_mask(spec, t, size, size));
        gt.frame_indices.push_back(t + 1);
    }
    clip.ground_truth = gt;
    return clip;
}

RunConfig config_at(int res) {
    RunConfig rc = resolve(default_config()).run;
    rc.train.input_resolution = res;
    return rc;
}

void BM_EncodeBackbone(benchmark::State& state) {
    const int res = static_cast<int>(state.range(0));
    const Backend backend(BackendDescriptor::stub_defaults());
    const VideoClip clip = make_clip(res, 1);
    for (auto _ : state) benchmark::DoNotOptimize(backend.encode_backbone(clip.frames, res));
}
BENCHMARK(BM_EncodeBackbone)->Arg(32)->Arg(64);

void BM_EncodeAudio(benchmark::State& state) {
    const Backend backend(BackendDescriptor::stub_defaults());
    const VideoClip clip = make_clip(16, 1);
    for (auto _ : state) benchmark::DoNotOptimize(backend.encode_audio(clip.audio[0]));
}
BENCHMARK(BM_EncodeAudio);

void BM_ForwardFrame(benchmark::State& state) {
    const int res = static_cast<int>(state.range(0));
    const RunConfig rc = config_at(res);
    const Backend backend(rc.backend);
    const ModelState model = init_model(rc);
    const VideoClip clip = make_clip(res, 1);
    for (auto _ : state) benchmark::DoNotOptimize(forward_frame(model, backend, clip.frames[0], clip.audio[0]));
}
BENCHMARK(BM_ForwardFrame)->Arg(32)->Arg(64);

void BM_LossAndGrad(benchmark::State& state) {
    const int res = static_cast<int>(state.range(0));
    const RunConfig rc = config_at(res);
    const Backend backend(rc.backend);
    const ModelState model = init_model(rc);
    const std::vector<VideoClip> clips{make_clip(res, 5)};
    for (auto _ : state) {
        TrainableParams grads = model.params.zeros_like();
        benchmark::DoNotOptimize(loss_and_grad(model, backend, clips, &grads));
    }
}
BENCHMARK(BM_LossAndGrad)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FrameIou(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const VideoClip clip = make_clip(n, 2);
    const Matrix& a = clip.ground_truth->masks[0];
    const Matrix& b = clip.ground_truth->masks[1];
    for (auto _ : state) benchmark::DoNotOptimize(frame_iou(a, b));
}
BENCHMARK(BM_FrameIou)->Arg(224)->Arg(512);

void BM_TotalLoss(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const VideoClip clip = make_clip(n, 5);
    MaskSet pred = *clip.ground_truth;
    pred.kind = MaskKind::soft;
    for (auto& m : pred.masks) m = (m.array() * 0.8 + 0.1).matrix();
    for (auto _ : state) benchmark::DoNotOptimize(total_loss_with_grad(pred, *clip.ground_truth));
}
BENCHMARK(BM_TotalLoss)->Arg(224);

}  // namespace

BENCHMARK_MAIN();
