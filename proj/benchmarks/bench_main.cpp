#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "stppm/arealgraph.hpp"
#include "stppm/dagar.hpp"
#include "stppm/gibbs.hpp"
#include "stppm/partition.hpp"
#include "stppm/partition_estimate.hpp"
#include "stppm/random.hpp"
#include "stppm/synth.hpp"

namespace {

using namespace stppm;

// Scenario-2 data on a rows x rows grid, fitted with the study hyperparameters.
struct Fixture {
  explicit Fixture(int rows) {
    Scenario sc = simulation2_scenario(2, rows, rows, 11);
    sc.times = 120;
    SyntheticDataset ds = generate(sc);
    const ModelDims dims{ds.map.size(), ds.panel.times(), ds.panel.diseases(), ds.panel.covariate_count(),
                         sc.lags.q()};
    ctx = std::make_unique<ModelContext>(ds.panel, ds.map, sc.lags,
                                         study_hyperparameters(2, dims, CohesionSpec::hb(0.35)));
    Rng rng(3);
    initial = sample_prior_given_partition(*ctx, Partition::single_block(ds.map.size()), rng);
  }
  std::unique_ptr<ModelContext> ctx;
  ModelState initial;
};

void BM_Sweep(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  GibbsSampler sampler(*f.ctx, f.initial, 5);
  for (int i = 0; i < 50; ++i) sampler.sweep();
  for (auto _ : state) {
    sampler.sweep();
    benchmark::DoNotOptimize(sampler.state().xi);
  }
  state.counters["areas"] = static_cast<double>(f.ctx->dims().areas);
}
BENCHMARK(BM_Sweep)->Arg(4)->Arg(7)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_DagarBuild(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const ArealMap map = ArealMap::grid(side, side);
  const DagOrdering ordering = dag_ordering(map);
  double alpha = 0.1;
  for (auto _ : state) {
    const DagarPrecision q(ordering, alpha);
    benchmark::DoNotOptimize(q.log_determinant());
    alpha = alpha > 0.9 ? 0.1 : alpha + 0.01;
  }
  state.SetComplexityN(side * side);
}
BENCHMARK(BM_DagarBuild)->RangeMultiplier(2)->Range(8, 64)->Complexity();

void BM_DagarQuadraticForm(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const ArealMap map = ArealMap::grid(side, side);
  const DagarPrecision q(dag_ordering(map), 0.6);
  Rng rng(1);
  const Eigen::VectorXd v = rng.normal_vector(map.size());
  for (auto _ : state) benchmark::DoNotOptimize(q.quadratic_form(v));
  state.SetComplexityN(side * side);
}
BENCHMARK(BM_DagarQuadraticForm)->RangeMultiplier(2)->Range(8, 64)->Complexity();

void BM_ViSearch(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(2);
  std::vector<Partition> samples;
  for (int s = 0; s < 1000; ++s) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int base = i < n / 2 ? 0 : 1;
      labels[static_cast<std::size_t>(i)] = rng.uniform() < 0.9 ? base : 2;
    }
    samples.push_back(Partition::from_labels(labels));
  }
  ViSearchOptions options;
  options.restarts = 4;
  for (auto _ : state) {
    const ViEstimate e = estimate_partition_vi(samples, options);
    benchmark::DoNotOptimize(e.expected_loss);
  }
}
BENCHMARK(BM_ViSearch)->Arg(30)->Arg(70)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
