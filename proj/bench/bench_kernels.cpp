// Throughput of the OpenMP kernels against their serial references.
// Run: build/bench/cdic_bench [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include <random>

#include "cdic/kernels.hpp"
#include "cdic/synthetic.hpp"

using namespace cdic;

namespace {

GrayImage make_speckle(int side) {
    synthetic::SpeckleSpec spec;
    spec.width = spec.height = side;
    spec.count = side * side / 130;
    spec.mig_floor = 0.0;
    return synthetic::generate_speckle(spec).image;
}

void bm_prewitt(benchmark::State& state, bool parallel) {
    const GrayImage img = make_speckle(static_cast<int>(state.range(0)));
    Grid2<double> fx, fy;
    for (auto _ : state) {
        if (parallel) kernels::prewitt(img.px, fx, fy);
        else kernels::prewitt_ref(img.px, fx, fy);
        benchmark::DoNotOptimize(fx.v.data());
    }
    state.SetItemsProcessed(state.iterations() * img.px.size());
}

void bm_prefilter(benchmark::State& state, bool parallel) {
    const GrayImage img = make_speckle(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        Grid2<double> c = img.px;
        if (parallel) kernels::bspline_prefilter(c);
        else kernels::bspline_prefilter_ref(c);
        benchmark::DoNotOptimize(c.v.data());
    }
    state.SetItemsProcessed(state.iterations() * img.px.size());
}

void bm_zncc_search(benchmark::State& state, bool parallel) {
    const GrayImage img = make_speckle(256);
    const int radius = static_cast<int>(state.range(0));
    for (auto _ : state) {
        const auto hit = parallel
                             ? kernels::zncc_search(img.px, img.px, 128, 128, 11, radius)
                             : kernels::zncc_search_ref(img.px, img.px, 128, 128, 11, radius);
        benchmark::DoNotOptimize(hit);
    }
}

void bm_render(benchmark::State& state, bool parallel) {
    const GrayImage img = make_speckle(static_cast<int>(state.range(0)));
    const Interpolant ip = Interpolant::make(img);
    Grid2<double> out(img.width(), img.height());
    for (auto _ : state) {
        if (parallel) kernels::render_rotation(ip, img.width() / 2.0, 3.0, 1.0, out);
        else kernels::render_rotation_ref(ip, img.width() / 2.0, 3.0, 1.0, out);
        benchmark::DoNotOptimize(out.v.data());
    }
    state.SetItemsProcessed(state.iterations() * out.size());
}

void bm_speckle(benchmark::State& state, bool parallel) {
    const int side = static_cast<int>(state.range(0));
    std::vector<kernels::Blob> blobs;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> pos(0.0, side), rad(1.5, 4.5);
    for (int i = 0; i < side * side / 130; ++i) blobs.push_back({pos(rng), pos(rng), rad(rng)});
    Grid2<double> out(side, side);
    for (auto _ : state) {
        if (parallel) kernels::render_speckle(blobs, 1.0, 0.0, out);
        else kernels::render_speckle_ref(blobs, 1.0, 0.0, out);
        benchmark::DoNotOptimize(out.v.data());
    }
    state.SetItemsProcessed(state.iterations() * out.size());
}

}  // namespace

BENCHMARK_CAPTURE(bm_prewitt, omp, true)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_prewitt, serial, false)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_prefilter, omp, true)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_prefilter, serial, false)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_zncc_search, omp, true)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_zncc_search, serial, false)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_render, omp, true)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_render, serial, false)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_speckle, omp, true)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_speckle, serial, false)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
