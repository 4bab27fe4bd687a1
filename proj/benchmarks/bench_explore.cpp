#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "twinverify/model.hpp"
#include "twinverify/query.hpp"
#include "twinverify/timing.hpp"
#include "twinverify/zone_engine.hpp"

using namespace twinverify;

namespace {

const std::filesystem::path kData = std::filesystem::path(TWINVERIFY_BENCH_DATA_DIR) / "dt";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The case-study net under the slow profile, with delays averaged.
const Network& case_study_ta() {
  static const Network net = to_approximate(parse_model(slurp(kData / "model.tvm"), [](const std::string& id) {
    return ingest_histogram(slurp(kData / "profiles" / "slow" / id));
  }));
  return net;
}

// `n` independent automata cycling through fixed delays of coprime lengths.
Network ring(int n) {
  std::string s;
  for (int i = 0; i < n; ++i) {
    const std::string p = "P" + std::to_string(i);
    s += "process " + p + " {\n  loc A init delay fixed " + std::to_string(2 + i) + "\n  loc B delay fixed " +
         std::to_string(3 + 2 * i) + "\n  edge A -> B\n  edge B -> A\n}\n";
  }
  return parse_model(s);
}

void run(benchmark::State& state, const Network& net, const std::string& query, bool subsumption) {
  const BoundQuery q = bind(parse_query(query), net);
  ZoneEngineOptions opt;
  opt.subsumption = subsumption;
  std::uint64_t states = 0;
  for (auto _ : state) {
    const CmcVerdict v = check_query(net, q, opt);
    states = v.stats.states_explored;
    benchmark::DoNotOptimize(v.result);
  }
  state.counters["states"] = static_cast<double>(states);
}

void BM_CaseStudyDeadlock(benchmark::State& state) {
  run(state, case_study_ta(), "A[] not deadlock", state.range(0) != 0);
}
BENCHMARK(BM_CaseStudyDeadlock)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_CaseStudyLeadsTo(benchmark::State& state) {
  run(state, case_study_ta(), "O.Running --> Unity.F3", true);
}
BENCHMARK(BM_CaseStudyLeadsTo)->Unit(benchmark::kMillisecond);

void BM_RingDeadlock(benchmark::State& state) {
  const Network net = ring(static_cast<int>(state.range(0)));
  run(state, net, "A[] not deadlock", true);
}
BENCHMARK(BM_RingDeadlock)->DenseRange(2, 4, 1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
