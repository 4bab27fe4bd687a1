#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "twinverify/model.hpp"
#include "twinverify/query.hpp"
#include "twinverify/smc.hpp"
#include "twinverify/timing.hpp"

using namespace twinverify;

namespace {

const std::filesystem::path kData = std::filesystem::path(TWINVERIFY_BENCH_DATA_DIR) / "dt";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const Network& case_study_sta() {
  static const Network net = parse_model(slurp(kData / "model.tvm"), [](const std::string& id) {
    return ingest_histogram(slurp(kData / "profiles" / "slow" / id));
  });
  return net;
}

void BM_SimulateRun(benchmark::State& state) {
  const Network& net = case_study_sta();
  std::uint64_t seed = 0, events = 0;
  for (auto _ : state) {
    const Trace tr = simulate_run(net, static_cast<double>(state.range(0)), 1'000'000, seed++);
    events += tr.events.size();
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateRun)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_EstimateProbability(benchmark::State& state) {
  const Network& net = case_study_sta();
  const Monitor m = bind(parse_query("Pr[<=10000](<> Unity.F3)"), net).ast.m1;
  SmcOptions opt;
  opt.runs = 100;
  opt.workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_probability(net, m, opt).successes);
}
BENCHMARK(BM_EstimateProbability)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_SampleEmpirical(benchmark::State& state) {
  const EmpiricalDistribution d = ingest_histogram(slurp(kData / "profiles" / "slow" / "plan_compute.csv"));
  Rng rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(d.sample(rng));
}
BENCHMARK(BM_SampleEmpirical);

}  // namespace

BENCHMARK_MAIN();
