#include <cmath>
#include <numbers>

#include <benchmark/benchmark.h>

#include <chdbc/schemes.hpp>

using namespace chdbc;

namespace {

State cosine_state(const Mesh& m) {
    return State(BulkField::sample(m, [](double x, double y) {
        return 0.3 * std::cos(2 * std::numbers::pi * x) * std::cos(std::numbers::pi * y);
    }));
}

void BM_StepCs1(benchmark::State& state) {
    const Mesh m(static_cast<int>(state.range(0)));
    const State s = cosine_state(m);
    const ModelParams p;
    const SchemeParams sp;
    for (auto _ : state) benchmark::DoNotOptimize(step_cs1(s, p, sp));
}
BENCHMARK(BM_StepCs1)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_StepBdf2(benchmark::State& state) {
    const Mesh m(static_cast<int>(state.range(0)));
    const ModelParams p;
    SchemeParams sp;
    sp.A = sp.B = SchemeParams::min_stabilizer(p);
    const State s0 = cosine_state(m);
    const State s1 = step_cs1(s0, p, sp).state;
    for (auto _ : state) benchmark::DoNotOptimize(step_bdf2(s1, s0, p, sp));
}
BENCHMARK(BM_StepBdf2)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Gradcheck(benchmark::State& state) {
    const Mesh m(32);
    const ModelParams p;
    const SchemeParams sp;
    const State s = cosine_state(m);
    const State next = step_cs1(s, p, sp).state;
    for (auto _ : state) benchmark::DoNotOptimize(functional_Fhn_gradcheck(next, s, p, sp));
}
BENCHMARK(BM_Gradcheck)->Unit(benchmark::kMillisecond);

} // namespace
