#include <benchmark/benchmark.h>

#include <vector>

#include "specnet/mlp.hpp"
#include "specnet/pencil.hpp"
#include "specnet/random.hpp"
#include "specnet/schemes.hpp"
#include "specnet/solver.hpp"
#include "specnet/training.hpp"

namespace {

using namespace specnet;

// Ring lattice with 2 * half_width neighbors per node and unit diagonal.
Pencil lattice(Index n, Index half_width) {
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) {
    t.push_back({i, i, 1.0});
    for (Index s = 1; s <= half_width; ++s) {
      t.push_back({i, (i + s) % n, 1.0});
      t.push_back({i, (i + n - s) % n, 1.0});
    }
  }
  return make_pencil(SparseSym::from_triplets(n, std::move(t)), true);
}

Matrix random_y(Index n, Index k) {
  Rng rng(1);
  Matrix y(n, k);
  for (Index i = 0; i < y.size(); ++i) y.data()[i] = 0.1 * rng.normal();
  return y;
}

void step_bench(benchmark::State& state, Scheme scheme) {
  const Index n = state.range(0);
  const Pencil p = lattice(n, 5);
  Embedding emb = make_embedding(p, random_y(n, 3));
  BatchPlan plan = BatchPlan::random(n, 10, 2);
  const auto batches = plan.batches();
  std::size_t j = 0;
  for (auto _ : state) {
    f2_step(p, emb, batches[j], 1e-4, scheme);
    j = (j + 1) % batches.size();
  }
  state.SetComplexityN(n);
}

void BM_F2StepLocal(benchmark::State& s) { step_bench(s, Scheme::kLocal); }
void BM_F2StepFull(benchmark::State& s) { step_bench(s, Scheme::kFull); }
void BM_F2StepNeighbor(benchmark::State& s) { step_bench(s, Scheme::kNeighbor); }

BENCHMARK(BM_F2StepLocal)->RangeMultiplier(2)->Range(256, 4096)->Complexity();
BENCHMARK(BM_F2StepFull)->RangeMultiplier(2)->Range(256, 4096)->Complexity();
BENCHMARK(BM_F2StepNeighbor)->RangeMultiplier(2)->Range(256, 4096)->Complexity();

void nn_bench(benchmark::State& state, Scheme scheme) {
  const Index n = state.range(0);
  const Pencil p = lattice(n, 5);
  Rng rng(3);
  Matrix x(n, 2);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
  MlpParams params = init_mlp({2, 128, 2}, 1);
  AdamState adam = AdamState::for_params(params);
  NeighborCaches caches;
  init_caches(params, p, x, caches);
  BatchPlan plan = BatchPlan::random(n, 4, 2);
  const auto batches = plan.batches();
  std::size_t j = 0;
  for (auto _ : state) {
    specnet2_train_step(params, p, x, caches, batches[j], scheme, 1e-4, adam);
    j = (j + 1) % batches.size();
  }
}

void BM_Specnet2StepFull(benchmark::State& s) { nn_bench(s, Scheme::kFull); }
void BM_Specnet2StepNeighbor(benchmark::State& s) { nn_bench(s, Scheme::kNeighbor); }

BENCHMARK(BM_Specnet2StepFull)->Arg(500)->Arg(2000);
BENCHMARK(BM_Specnet2StepNeighbor)->Arg(500)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
