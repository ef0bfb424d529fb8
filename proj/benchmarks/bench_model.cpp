#include <benchmark/benchmark.h>

#include "bargrain/model.hpp"
#include "bargrain/preprocess.hpp"
#include "bargrain/rng.hpp"

using namespace bargrain;

namespace {

ModelConfig bench_config(std::size_t n, std::size_t t) {
    ModelConfig c;
    c.n_rois = n;
    c.t_steps = t;
    c.seed = 1;
    return c;
}

Matrix random_series(std::size_t n, std::size_t t) {
    Rng rng(7);
    Matrix m(n, t);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < t; ++j) m(i, j) = rng.normal();
    return m;
}

void BM_Pearson(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix x = random_series(n, 150);
    for (auto _ : state) benchmark::DoNotOptimize(pearson_correlation(x));
}
BENCHMARK(BM_Pearson)->Arg(16)->Arg(96);

void BM_ForwardBackward(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ModelState model = ModelState::initialize(bench_config(n, 64));
    const SubjectInput in = SubjectInput::prepare({"b", random_series(n, 64), Label::disease}, 0.3);
    Rng rng(3);
    for (auto _ : state) {
        const GumbelNoise noise = GumbelNoise::sample(n, rng);
        Tensor loss = bce_with_logits(forward(in, model, &noise), 1);
        loss.backward();
        benchmark::DoNotOptimize(loss.item());
    }
}
BENCHMARK(BM_ForwardBackward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_EvaluationForward(benchmark::State& state) {
    const ModelState model = ModelState::initialize(bench_config(16, 64));
    const SubjectInput in = SubjectInput::prepare({"b", random_series(16, 64), Label::control}, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(predict_probability(in, model));
}
BENCHMARK(BM_EvaluationForward)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
