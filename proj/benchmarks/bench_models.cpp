#include <benchmark/benchmark.h>

#include <map>

#include "pickling/advisor.hpp"
#include "pickling/config.hpp"
#include "pickling/pipeline.hpp"
#include "pickling/simulator.hpp"

using namespace pickling;

namespace {

const AppConfig& config() {
    static const AppConfig c = load_config(PICKLING_BENCH_CONFIG);
    return c;
}

const Dataset& dataset(std::size_t n) {
    static std::map<std::size_t, Dataset> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, sim::generate_dataset(n, 0.75, 42, config().simulator)).first;
    }
    return it->second;
}

const TrainedPipeline& trained() {
    static const TrainedPipeline p = train_pipeline(dataset(1800), config());
    return p;
}

void BM_Generate(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim::generate_dataset(n, 0.75, 42, config().simulator));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Generate)->Arg(600)->Arg(1800)->Unit(benchmark::kMillisecond);

void BM_TrainRecBFN(benchmark::State& state) {
    const auto patterns = network_patterns(dataset(static_cast<std::size_t>(state.range(0))));
    for (auto _ : state) {
        benchmark::DoNotOptimize(recbfn::train_recbfn(patterns, config().thresholds, config().max_epochs));
    }
}
BENCHMARK(BM_TrainRecBFN)->Arg(600)->Arg(1800)->Unit(benchmark::kMillisecond);

void BM_TrainTree(benchmark::State& state) {
    const auto& net = trained().models.network;
    const auto& grid = config().grid;
    const auto set = tree_training_set(dataset(1800), [&](const CoilRecord& r) {
        return defective_at_every_speed(net, r.conditions(), grid);
    });
    for (auto _ : state) benchmark::DoNotOptimize(tree::train_tree(set, config().tree));
    state.counters["rows"] = static_cast<double>(set.size());
}
BENCHMARK(BM_TrainTree)->Unit(benchmark::kMillisecond);

void BM_Pipeline(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(train_pipeline(dataset(1800), config()));
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond);

void BM_AdviseScan(benchmark::State& state) {
    const auto& m = trained().models;
    const auto conditions = dataset(1800)[0].conditions();
    const advisor::ScanGrid grid{100, 500, static_cast<double>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(advisor::advise(m.tree, m.network, conditions, grid));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_AdviseScan)->Arg(5)->Arg(1);

void BM_NetworkPredict(benchmark::State& state) {
    const auto& net = trained().models.network;
    const auto x = network_input(dataset(1800)[0]);
    for (auto _ : state) benchmark::DoNotOptimize(net.predict(x));
}
BENCHMARK(BM_NetworkPredict);

}  // namespace

BENCHMARK_MAIN();
