#include <splatedit/rasterizer.hpp>
#include <splatedit/synthetic.hpp>

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

using namespace splatedit;

namespace {

constexpr int kImageSize = 256;

Camera bench_camera() {
    return Camera::look_at(Intrinsics::from_fov(kImageSize, kImageSize, 60), Vec3d(0, -4, 1), Vec3d::Zero(),
                           Vec3d::UnitZ());
}

// Gaussians scattered through the view frustum with small random sizes.
GaussianScene bench_scene(std::size_t count) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GaussianScene scene;
    scene.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Gaussian g;
        g.position = Vec3f(static_cast<float>(1.5 * u(rng)), static_cast<float>(1.5 * u(rng)),
                           static_cast<float>(1.5 * u(rng)));
        g.rotation = Vec4f(static_cast<float>(u(rng)), static_cast<float>(u(rng)), static_cast<float>(u(rng)),
                           static_cast<float>(u(rng)))
                         .normalized();
        g.log_scale = Vec3f::Constant(static_cast<float>(std::log(0.01 + 0.02 * (u(rng) + 1))));
        g.opacity_logit = static_cast<float>(u(rng));
        g.sh = {static_cast<float>(u(rng)), static_cast<float>(u(rng)), static_cast<float>(u(rng))};
        scene.push_back(g);
    }
    return scene;
}

void BM_RenderReference(benchmark::State& state) {
    const GaussianScene scene = bench_scene(static_cast<std::size_t>(state.range(0)));
    const Camera cam = bench_camera();
    for (auto _ : state) benchmark::DoNotOptimize(render(scene, cam, Vec3d::Zero()));
}

void BM_RenderTiled(benchmark::State& state) {
    const GaussianScene scene = bench_scene(static_cast<std::size_t>(state.range(0)));
    const Camera cam = bench_camera();
    for (auto _ : state) benchmark::DoNotOptimize(render_fast(scene, cam, Vec3d::Zero()));
}

void BM_ForwardBackward(benchmark::State& state) {
    const GaussianScene scene = bench_scene(static_cast<std::size_t>(state.range(0)));
    const Camera cam = bench_camera();
    RenderOutputGrad up;
    up.color = Image(kImageSize, kImageSize, 3, 1e-5);
    TileRasterizer r;
    for (auto _ : state) {
        benchmark::DoNotOptimize(r.forward(scene, cam, Vec3d::Zero()));
        benchmark::DoNotOptimize(r.backward(up));
    }
}

void BM_SyntheticRoomFrame(benchmark::State& state) {
    const SyntheticRoom room = make_synthetic_room(128);
    for (auto _ : state)
        benchmark::DoNotOptimize(render_fast(room.scene, room.training_cameras.front(), Vec3d::Zero()));
}

}  // namespace

BENCHMARK(BM_RenderReference)->Arg(50000)->Iterations(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderTiled)->Arg(50000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardBackward)->Arg(50000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SyntheticRoomFrame)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
