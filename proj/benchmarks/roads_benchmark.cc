#include <map>

#include <benchmark/benchmark.h>

#include "roads/evaluator.h"
#include "roads/ingest.h"
#include "roads/predictor.h"
#include "roads/synthgen.h"

namespace roads {
namespace {

const Corpus& SharedCorpus(int users) {
  static std::map<int, Corpus> cache;
  auto it = cache.find(users);
  if (it == cache.end()) {
    GenParams p;
    p.n_users = users;
    it = cache.emplace(users, ApplyFilters(Generate(p)).corpus).first;
  }
  return it->second;
}

const TaxonomyPair& Taxonomies() {
  static const TaxonomyPair tax = SyntheticTaxonomies(17, 47);
  return tax;
}

void BM_Generate(benchmark::State& state) {
  GenParams p;
  p.n_users = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Generate(p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Generate)->Arg(1000)->Arg(7500)->Unit(benchmark::kMillisecond);

void BM_Train(benchmark::State& state) {
  const auto& corpus = SharedCorpus(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        Train(corpus, StepKind::kJob, Method::kPreviousStep));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Train)->Arg(1000)->Arg(7500)->Unit(benchmark::kMillisecond);

void BM_Rank(benchmark::State& state) {
  const auto model =
      Train(SharedCorpus(7500), StepKind::kJob, Method::kPreviousStep);
  const Context context = std::vector<ConceptKey>{{StepKind::kJob, 3}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(Rank(model, context, Taxonomies().job));
  }
}
BENCHMARK(BM_Rank);

void BM_LeaveOneOutRank(benchmark::State& state) {
  const auto& corpus = SharedCorpus(7500);
  auto model = Train(corpus, StepKind::kJob, Method::kPreviousStep);
  std::vector<std::pair<const Trajectory*, std::size_t>> steps;
  for (const auto& t : corpus) {
    for (std::size_t i = 1; i + 1 < t.steps.size(); ++i) {
      if (t.steps[i].kind == StepKind::kJob) steps.emplace_back(&t, i);
    }
  }
  std::size_t next = 0;
  for (auto _ : state) {
    const auto& [t, i] = steps[next++ % steps.size()];
    benchmark::DoNotOptimize(LeaveOneOutRank(model, *t, i, Taxonomies().job));
  }
}
BENCHMARK(BM_LeaveOneOutRank);

void BM_Evaluate(benchmark::State& state) {
  const auto& corpus = SharedCorpus(7500);
  EvalOptions options;
  options.jobs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Evaluate(corpus, Taxonomies(), StepKind::kJob,
                                      Method::kPreviousStep, options));
  }
}
BENCHMARK(BM_Evaluate)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace roads

BENCHMARK_MAIN();
