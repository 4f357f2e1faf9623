#include <benchmark/benchmark.h>

#include "proptree/linear_form.hpp"
#include "proptree/logistic.hpp"
#include "proptree/model_selection.hpp"
#include "proptree/rng.hpp"
#include "proptree/synthetic.hpp"
#include "proptree/tree.hpp"

using namespace proptree;

namespace {

SyntheticSpec bench_spec(std::uint64_t n) {
    SyntheticSpec spec;
    spec.n = n;
    spec.seed = 1;
    spec.features.push_back(
        {{"EMPL", ColumnKind::numeric, {}}, {FeatureDist::Type::uniform_int, 1, 500, {}}});
    spec.features.push_back(
        {{"AGE", ColumnKind::numeric, {}}, {FeatureDist::Type::uniform_real, 0, 40, {}}});
    spec.features.push_back(
        {{"IND", ColumnKind::nominal, {"a", "b", "c", "d", "e", "f", "g", "h"}},
         {FeatureDist::Type::categorical, 0, 0, {3, 2, 2, 1, 1, 1, 1, 1}}});
    spec.features.push_back({{"MSA", ColumnKind::ordinal, {"1", "2", "3", "4", "5", "6"}},
                             {FeatureDist::Type::categorical, 0, 0, {1, 1, 1, 1, 1, 2}}});
    spec.propensity.type = PropensityModel::Type::logistic;
    spec.propensity.intercept = 0.4;
    spec.propensity.coefficients = {{"EMPL", -0.002}, {"AGE", 0.01}};
    return spec;
}

const std::vector<std::string> kColumns{"EMPL", "AGE", "IND", "MSA"};

void BM_BestSplit(benchmark::State& state) {
    const Dataset ds = generate_synthetic(bench_spec(static_cast<std::uint64_t>(state.range(0))));
    std::vector<std::uint32_t> rows(ds.n_rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<std::uint32_t>(i);
    for (auto _ : state) {
        auto cand = best_split(ds, rows, kColumns, min_leaf_size(ds.n_rows()));
        benchmark::DoNotOptimize(cand);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BestSplit)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_GrowTree(benchmark::State& state) {
    const Dataset ds = generate_synthetic(bench_spec(static_cast<std::uint64_t>(state.range(0))));
    for (auto _ : state) {
        TreeModel tree = grow_tree(ds, {6, 0, kColumns});
        benchmark::DoNotOptimize(tree);
    }
}
BENCHMARK(BM_GrowTree)->Arg(10000)->Arg(50000);

void BM_CvTrace(benchmark::State& state) {
    const Dataset ds = generate_synthetic(bench_spec(static_cast<std::uint64_t>(state.range(0))));
    for (auto _ : state) {
        CVTrace trace = cv_trace(ds, {4, 0, kColumns}, 4, 7);
        benchmark::DoNotOptimize(trace);
    }
}
BENCHMARK(BM_CvTrace)->Arg(5000)->Arg(20000);

void BM_LogisticFit(benchmark::State& state) {
    const Dataset ds = generate_synthetic(bench_spec(static_cast<std::uint64_t>(state.range(0))));
    const std::vector<TermSpec> terms{TermSpec::intercept(), TermSpec::main("EMPL"),
                                      TermSpec::main("AGE"), TermSpec::main("IND"),
                                      TermSpec::main("MSA")};
    for (auto _ : state) {
        LogisticModel model = fit_logistic(ds, terms, "RESP");
        benchmark::DoNotOptimize(model);
    }
}
BENCHMARK(BM_LogisticFit)->Arg(10000)->Arg(50000);

void BM_Predict(benchmark::State& state) {
    const Dataset ds = generate_synthetic(bench_spec(100000));
    const TreeModel tree = grow_tree(ds, {6, 0, kColumns});
    const BoundTree bound(tree, ds);
    std::size_t row = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bound.predict(row));
        row = (row + 1) % ds.n_rows();
    }
}
BENCHMARK(BM_Predict);

}  // namespace

BENCHMARK_MAIN();
