#include <benchmark/benchmark.h>

#include "twinverify/dbm.hpp"
#include "twinverify/rng.hpp"

using namespace twinverify;

namespace {

// A non-trivial canonical zone over `clocks` clocks with constants below 20.
Dbm random_zone(Rng& rng, int clocks) {
  for (;;) {
    Dbm z(clocks + 1);
    for (int k = 0; k < 2 * clocks; ++k) {
      const int i = static_cast<int>(rng.index(static_cast<std::uint64_t>(clocks) + 1));
      const int j = static_cast<int>(rng.index(static_cast<std::uint64_t>(clocks) + 1));
      if (i == j) continue;
      const auto c = static_cast<std::int64_t>(rng.index(20));
      if (!z.constrain(i, j, Bound::le(i == 0 ? -c / 4 : c))) break;
    }
    if (!z.is_empty()) return z;
  }
}

void BM_Close(benchmark::State& state) {
  Rng rng(1);
  const Dbm z = random_zone(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Dbm copy = z;
    copy.close();
    benchmark::DoNotOptimize(copy);
  }
}
BENCHMARK(BM_Close)->DenseRange(2, 10, 4);

void BM_UpAndExtrapolate(benchmark::State& state) {
  const int clocks = static_cast<int>(state.range(0));
  Rng rng(2);
  const Dbm z = random_zone(rng, clocks);
  const std::vector<std::int64_t> k(static_cast<std::size_t>(clocks) + 1, 10);
  for (auto _ : state) {
    Dbm copy = z;
    copy.up();
    copy.extrapolate(k);
    benchmark::DoNotOptimize(copy);
  }
}
BENCHMARK(BM_UpAndExtrapolate)->DenseRange(2, 10, 4);

void BM_Includes(benchmark::State& state) {
  Rng rng(3);
  const int clocks = static_cast<int>(state.range(0));
  const Dbm a = random_zone(rng, clocks), b = random_zone(rng, clocks);
  for (auto _ : state) benchmark::DoNotOptimize(a.includes(b));
}
BENCHMARK(BM_Includes)->DenseRange(2, 10, 4);

void BM_Subtract(benchmark::State& state) {
  Rng rng(4);
  const int clocks = static_cast<int>(state.range(0));
  const Dbm a = random_zone(rng, clocks), b = random_zone(rng, clocks);
  for (auto _ : state) benchmark::DoNotOptimize(subtract(a, b));
}
BENCHMARK(BM_Subtract)->DenseRange(2, 10, 4);

}  // namespace

BENCHMARK_MAIN();
