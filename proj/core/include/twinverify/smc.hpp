#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twinverify/model.hpp"
#include "twinverify/query.hpp"
#include "twinverify/rng.hpp"
#include "twinverify/stats.hpp"
#include "twinverify/zone_engine.hpp"

namespace twinverify {

struct Snapshot {
  std::vector<int> locs;
  std::vector<std::int64_t> vars;
  std::vector<double> clocks;  // indexed by clock id, slot 0 is always 0
};

struct TraceEvent {
  double time = 0;
  int channel = -1;            // -1 for an internal step
  std::vector<int> automata;   // emitter first
  std::vector<int> edges;      // parallel to `automata`
  Snapshot post;
};

enum class EndReason : std::uint8_t { TimeBound, StepBound, Stuck };
const char* to_string(EndReason r);

struct Trace {
  Snapshot initial;
  std::vector<TraceEvent> events;
  double end_time = 0;
  EndReason end_reason = EndReason::TimeBound;

  /// Discrete state in force during segment i (0 = before the first event).
  const Snapshot& segment_state(std::size_t i) const { return i == 0 ? initial : events[i - 1].post; }
  double segment_start(std::size_t i) const { return i == 0 ? 0.0 : events[i - 1].time; }
};

inline constexpr double kDefaultExponentialRate = 1.0 / 1000.0;

/// Race semantics. Fixed and Empirical locations sample their sojourn on
/// entry; locations without a delay sample inside the window where an
/// active edge can be enabled (uniform when bounded, shifted exponential
/// when not). The earliest automaton fires one of its enabled active edges,
/// chosen uniformly; an emit picks a receiver uniformly among the enabled
/// ones. Deterministic in (net, bounds, seed).
Trace simulate_run(const Network& net, double time_bound, std::uint64_t step_bound, std::uint64_t seed);

class HorizonError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Exact bounded monitoring over the piecewise-linear clock evolution.
/// Throws HorizonError when the trace stops short of the bound without
/// being stuck.
bool evaluate(const Monitor& m, const Trace& tr);

/// Reduction of `e` over every instant in [0, bound].
double reduce_value(const Expr& e, Reduce reduce, double bound, const Trace& tr);

struct SmcOptions {
  double epsilon = 0.05;
  double alpha = 0.05;
  double beta = 0.05;
  double delta = 0.01;          // indifference half-width of hypothesis tests
  double compare_delta = 0.05;  // indifference half-width of probability comparison
  std::optional<std::uint64_t> runs;  // overrides the Chernoff run count
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 1;
  std::uint64_t step_bound = 1'000'000;  // per run
  std::uint64_t max_runs = 10'000;       // cap for sequential tests
};

enum class SmcKind : std::uint8_t { ProbBound, Estimate, TestResult, Trajectories };
enum class TestOutcome : std::uint8_t { AcceptH0, AcceptH1, Inconclusive };
const char* to_string(TestOutcome t);

struct TrajectoryPoint {
  std::uint64_t run = 0;
  double time = 0;
  std::size_t expr = 0;
  double value = 0;
};

struct SmcVerdict {
  SmcKind kind = SmcKind::ProbBound;
  // ProbBound
  Direction direction = Direction::AtLeast;
  double bound = 0;
  double confidence = 0;
  std::uint64_t successes = 0;
  std::uint64_t runs = 0;
  Interval interval;
  // Estimate
  double mean = 0;
  double half_width = 0;
  // TestResult
  TestOutcome outcome = TestOutcome::Inconclusive;
  double alpha = 0;
  double beta = 0;
  std::string hypothesis;  // human-readable accepted hypothesis
  // Trajectories
  std::vector<std::string> expr_names;
  std::vector<TrajectoryPoint> points;

  std::uint64_t seed = 0;
  PerfTriple stats;

  /// Whether the query's claim stands (false for a refuted bound or a
  /// rejected hypothesis).
  bool holds() const;
};

SmcVerdict estimate_probability(const Network& net, const Monitor& m, const SmcOptions& opt,
                                Direction direction = Direction::Auto);
SmcVerdict hypothesis_test(const Network& net, const Monitor& m, Direction direction, double theta,
                           const SmcOptions& opt);
SmcVerdict compare_probability(const Network& net, const Monitor& m1, const Monitor& m2, const SmcOptions& opt);
SmcVerdict estimate_value(const Network& net, const Expr& e, Reduce reduce, double bound, std::uint64_t runs,
                          const SmcOptions& opt);
SmcVerdict simulate_query(const Network& net, std::uint64_t runs, double bound, const std::vector<ExprPtr>& exprs,
                          const SmcOptions& opt);

/// Dispatches a bound statistical query.
SmcVerdict run_smc_query(const Network& net, const BoundQuery& q, const SmcOptions& opt);

/// `Pr >= 0.963783`, `1387.94 +/- 1.35`, `accept H1: Pr >= 0.51`, ...
std::string render_verdict(const SmcVerdict& v);

/// run,time_ms,expr_name,value
std::string trajectory_csv(const SmcVerdict& v);

/// Six significant digits, shortest form; stable across platforms.
std::string format_number(double v);

}  // namespace twinverify
