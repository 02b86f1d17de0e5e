#include <random>

#include <benchmark/benchmark.h>

#include <chdbc/elliptic.hpp>
#include <chdbc/grid.hpp>

using namespace chdbc;

namespace {

BulkField random_field(const Mesh& m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BulkField f(m);
    for (double& v : f.values()) v = u(rng);
    return f;
}

void BM_ApplyLh(benchmark::State& state) {
    const Mesh m(static_cast<int>(state.range(0)));
    const BulkField f = random_field(m, 1);
    for (auto _ : state) benchmark::DoNotOptimize(apply_Lh(f));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(m.bulk_size()));
}
BENCHMARK(BM_ApplyLh)->RangeMultiplier(2)->Range(16, 256);

void BM_SolveLh(benchmark::State& state) {
    const Mesh m(static_cast<int>(state.range(0)));
    BulkField f = random_field(m, 2);
    f -= BulkField(m, mean(f));
    benchmark::DoNotOptimize(solve_Lh(f)); // plan outside the timed loop
    for (auto _ : state) benchmark::DoNotOptimize(solve_Lh(f));
}
BENCHMARK(BM_SolveLh)->RangeMultiplier(2)->Range(16, 256);

} // namespace

BENCHMARK_MAIN();
