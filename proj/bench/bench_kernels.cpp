#include "docval/fixtures.hpp"
#include "docval/kernels.hpp"
#include "docval/pipeline.hpp"
#include "docval/records.hpp"

#include <benchmark/benchmark.h>

#include <sstream>

using namespace docval;

namespace {

const FixtureSet & corpus() {
    static const FixtureSet fx = [] {
        FixtureOptions opts;
        opts.n        = 20000;
        FixtureSet set = generate_fixtures(opts);
        corrupt_fixtures(set, 2000, 3);
        return set;
    }();
    return fx;
}

std::vector<PairRef> pairs() {
    const auto &         fx = corpus();
    std::vector<PairRef> out;
    out.reserve(fx.examples.size());
    for (size_t i = 0; i < fx.examples.size(); ++i) {
        out.push_back({ &fx.examples[i], &fx.predictions[i] });
    }
    return out;
}

void BM_ValidateSerial(benchmark::State & state) {
    const auto            refs = pairs();
    const ValidatorConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(validate_serial(refs, cfg));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(refs.size()));
}

void BM_ValidateParallel(benchmark::State & state) {
    const auto            refs = pairs();
    const ValidatorConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(validate_parallel(refs, cfg, static_cast<int>(state.range(0))));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(refs.size()));
}

void BM_ReportsParallel(benchmark::State & state) {
    const auto            refs = pairs();
    const ValidatorConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_reports_parallel(refs, cfg, static_cast<int>(state.range(0))));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(refs.size()));
}

void BM_FilterStream(benchmark::State & state) {
    const auto &       fx = corpus();
    std::string        ex_text;
    std::string        pr_text;
    for (size_t i = 0; i < fx.examples.size(); ++i) {
        ex_text += example_to_line(fx.examples[i]) + "\n";
        pr_text += prediction_to_line(fx.predictions[i]) + "\n";
    }
    const ValidatorConfig cfg;
    StreamOptions         opts;
    opts.jobs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        std::istringstream ex_in(ex_text);
        std::istringstream pr_in(pr_text);
        std::ostringstream out;
        benchmark::DoNotOptimize(filter_stream(ex_in, pr_in, &out, cfg, opts));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(fx.examples.size()));
}

}  // namespace

BENCHMARK(BM_ValidateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ValidateParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReportsParallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FilterStream)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
