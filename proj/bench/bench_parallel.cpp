#include <benchmark/benchmark.h>

#include "prelat/parallel.hpp"

using namespace prelat;

namespace {

const std::vector<Term>& sweep_terms() {
  static const std::vector<Term> terms = enumerate_terms(7, {0, 1, 2, 3});
  return terms;
}

std::vector<Scenario> small_batch() {
  std::vector<Scenario> out;
  for (std::size_t n = 1; n <= 3; ++n)
    for (auto& order : all_preorders(n)) out.push_back(preorder_scenario(order, Schedule::OneEdgePerStage));
  return out;
}

void BM_OracleSweepSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(nf_oracle_sweep_serial(sweep_terms()));
}
void BM_OracleSweepParallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(nf_oracle_sweep_parallel(sweep_terms()));
}
void BM_MeetJoinSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(meet_join_sweep_serial({0, 1, 2}));
}
void BM_MeetJoinParallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(meet_join_sweep_parallel({0, 1, 2}));
}
void BM_BatchSerial(benchmark::State& st) {
  auto batch = small_batch();
  for (auto _ : st) benchmark::DoNotOptimize(run_batch_serial(batch));
}
void BM_BatchParallel(benchmark::State& st) {
  auto batch = small_batch();
  for (auto _ : st) benchmark::DoNotOptimize(run_batch_parallel(batch));
}

}  // namespace

BENCHMARK(BM_OracleSweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleSweepParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeetJoinSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeetJoinParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
