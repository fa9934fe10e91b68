// Serial reference vs OpenMP kernels, plus one full training run per backend.
//   ./build/bench/bench_kernels --benchmark_filter=gram

#include <benchmark/benchmark.h>

#include "sfhreg/data.hpp"
#include "sfhreg/kernels.hpp"
#include "sfhreg/models.hpp"
#include "sfhreg/random.hpp"

using namespace sfhreg;
namespace k = sfhreg::kernels;

namespace {

constexpr std::size_t kFeatures = 16;
constexpr std::size_t kOutputs = 4;

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    Xoshiro256pp rng(seed);
    Matrix m(r, c);
    for (auto& v : m.data()) v = rng.uniform(-1.0, 1.0);
    return m;
}

template <k::Backend B>
void BM_gram(benchmark::State& st) {
    const Matrix x = random_matrix(st.range(0), kFeatures + 1, 1);
    for (auto _ : st) benchmark::DoNotOptimize(k::gram(B, x));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <k::Backend B>
void BM_abs_product_sums(benchmark::State& st) {
    const Matrix x = random_matrix(st.range(0), kFeatures + 1, 2);
    for (auto _ : st) benchmark::DoNotOptimize(k::abs_product_sums(B, x));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <k::Backend B>
void BM_scores(benchmark::State& st) {
    const Matrix x = random_matrix(st.range(0), kFeatures + 1, 3);
    const Matrix w = random_matrix(kOutputs, kFeatures + 1, 4);
    for (auto _ : st) benchmark::DoNotOptimize(k::scores(B, x, w));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <k::Backend B>
void BM_weighted_row_sums(benchmark::State& st) {
    const Matrix x = random_matrix(st.range(0), kFeatures + 1, 5);
    const Matrix r = random_matrix(st.range(0), kOutputs, 6);
    for (auto _ : st) benchmark::DoNotOptimize(k::weighted_row_sums(B, x, r));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <k::Backend B>
void BM_train_lffr(benchmark::State& st) {
    const SynthData s = synth(st.range(0), kFeatures, kOutputs, 0.1, 7);
    TrainConfig cfg;
    cfg.iterations = 20;
    cfg.backend = B;
    for (auto _ : st) benchmark::DoNotOptimize(train(s.data, ModelKind::lffr, cfg));
}

#define SIZES RangeMultiplier(10)->Range(1000, 1000000)->Unit(benchmark::kMicrosecond)

BENCHMARK(BM_gram<k::Backend::serial>)->SIZES;
BENCHMARK(BM_gram<k::Backend::openmp>)->SIZES->UseRealTime();
BENCHMARK(BM_abs_product_sums<k::Backend::serial>)->SIZES;
BENCHMARK(BM_abs_product_sums<k::Backend::openmp>)->SIZES->UseRealTime();
BENCHMARK(BM_scores<k::Backend::serial>)->SIZES;
BENCHMARK(BM_scores<k::Backend::openmp>)->SIZES->UseRealTime();
BENCHMARK(BM_weighted_row_sums<k::Backend::serial>)->SIZES;
BENCHMARK(BM_weighted_row_sums<k::Backend::openmp>)->SIZES->UseRealTime();
BENCHMARK(BM_train_lffr<k::Backend::serial>)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_train_lffr<k::Backend::openmp>)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
