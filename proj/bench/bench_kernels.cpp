// Serial vs OpenMP timings for the three parallel kernels: per-document
// feature extraction, GBT split search, and extra-trees construction.

#include <benchmark/benchmark.h>

#include <vector>

#include "stylo/features.hpp"
#include "stylo/model.hpp"
#include "stylo/rng.hpp"
#include "support/fixtures.hpp"
#include "support/synthetic.hpp"

using namespace stylo;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::serial : Execution::parallel; }

const Corpus& bench_corpus() {
    static const Corpus c = synth::cheat_like(200, 1);
    return c;
}

const Dataset& bench_matrix() {
    static const Dataset d = synth::injected_signal(2000, 60, 1.0, 4);
    return d;
}

void BM_Extract(benchmark::State& state) {
    const auto ids = FeatureRegistry::instance().ids();
    for (auto _ : state) {
        auto m = extract_matrix(bench_corpus(), ids, fixtures::extractor(), mode(state));
        benchmark::DoNotOptimize(m.data.values.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(bench_corpus().size()));
}

void BM_SplitSearch(benchmark::State& state) {
    const auto& d = bench_matrix();
    const auto index = build_column_index(d);
    Rng rng(2);
    std::vector<double> g(d.rows), h(d.rows, 0.25);
    for (auto& x : g) x = rng.normal();
    std::vector<int> node_of_row(d.rows);
    for (auto& n : node_of_row) n = static_cast<int>(rng.below(8));
    for (auto _ : state) {
        auto s = find_best_splits(d, index, g, h, node_of_row, 8, GbtParams{}, mode(state));
        benchmark::DoNotOptimize(s.data());
    }
}

void BM_SplitSearchReference(benchmark::State& state) {
    const auto& d = bench_matrix();
    Rng rng(2);
    std::vector<double> g(d.rows), h(d.rows, 0.25);
    for (auto& x : g) x = rng.normal();
    std::vector<std::vector<std::size_t>> rows(8);
    for (std::size_t r = 0; r < d.rows; ++r) rows[rng.below(8)].push_back(r);
    for (auto _ : state) {
        for (const auto& node : rows) {
            auto s = find_best_split_reference(d, node, g, h, GbtParams{});
            benchmark::DoNotOptimize(s);
        }
    }
}

void BM_GbtTrain(benchmark::State& state) {
    GbtParams p;
    p.rounds = 20;
    for (auto _ : state) {
        auto e = train_gbt(bench_matrix(), p, mode(state), nullptr);
        benchmark::DoNotOptimize(e.trees.data());
    }
}

void BM_ExtraTrees(benchmark::State& state) {
    ExtraTreesParams p;
    p.trees = 50;
    for (auto _ : state) {
        auto e = train_extra_trees(bench_matrix(), p, 1, mode(state));
        benchmark::DoNotOptimize(e.trees.data());
    }
}

}  // namespace

// Arg 0 = serial, 1 = parallel
BENCHMARK(BM_Extract)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SplitSearch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SplitSearchReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GbtTrain)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExtraTrees)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
