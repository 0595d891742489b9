// Serial vs OpenMP scoring of a synthetic test set.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "synthetic.hpp"
#include "zsp/builtin_domains.hpp"
#include "zsp/evaluation.hpp"

using namespace zsp;

namespace {

struct Fixture {
  DomainRegistry reg = builtin_registry();
  Dataset data;
  std::vector<const Example*> examples;
  Model model;

  Fixture() {
    data = testing::synthetic_corpus(builtin_domains(), 30, 0, 5);
    for (const auto& [id, dd] : data) {
      for (const auto& e : dd.test) examples.push_back(&e);
    }
    model.weights = {{"cooc-any|value|anchor", 1.0},
                     {"missing-any|value|anchor", -1.0},
                     {"cooc-any|method|desc", 1.0},
                     {"missing-any|method|desc", -0.5},
                     {"size>5", -0.1}};
  }

  DomainResolver resolver() const {
    return [this](const std::string& id) -> const Domain& { return reg.get(id); };
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_ScoreSerial(benchmark::State& state) {
  Fixture& f = fixture();
  f.model.parser.beam_size = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(score_examples_serial(f.model, f.examples, f.resolver()));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.examples.size()));
}

void BM_ScoreParallel(benchmark::State& state) {
  Fixture& f = fixture();
  f.model.parser.beam_size = static_cast<int>(state.range(0));
  state.counters["threads"] = omp_get_max_threads();
  for (auto _ : state) benchmark::DoNotOptimize(score_examples_parallel(f.model, f.examples, f.resolver()));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.examples.size()));
}

}  // namespace

BENCHMARK(BM_ScoreSerial)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreParallel)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
