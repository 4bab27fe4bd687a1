#pragma once

#include <cstdint>
#include <ctime>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "twinverify/dbm.hpp"
#include "twinverify/model.hpp"
#include "twinverify/query.hpp"

namespace twinverify {

/// Per-query cost: states stored, CPU time, and the engine's own memory
/// estimate (states x state footprint), which is deterministic.
struct PerfTriple {
  std::uint64_t states_explored = 0;
  double cpu_ms = 0;
  std::uint64_t peak_mem_kib = 0;
};

/// Process CPU time, for PerfTriple::cpu_ms.
class CpuTimer {
public:
  CpuTimer() : start_(std::clock()) {}
  double elapsed_ms() const { return 1000.0 * static_cast<double>(std::clock() - start_) / CLOCKS_PER_SEC; }

private:
  std::clock_t start_;
};

/// Zero means unlimited.
struct ResourceCaps {
  std::uint64_t max_states = 0;
  std::uint64_t max_mem_kib = 0;
};

enum class CmcResult : std::uint8_t { Satisfied, NotSatisfied, ResourceLimit };
const char* to_string(CmcResult r);

struct SymbolicState {
  std::vector<int> locs;
  std::vector<std::int64_t> vars;
  Dbm zone;
};

/// One discrete step of a witness. `partner` is the receiving side of a
/// handshake. The delay window bounds the time spent in the source state
/// before the step fires, given the prefix; `delay_hi < 0` means unbounded.
struct TraceStep {
  int automaton = -1;
  int edge = -1;
  int partner = -1;
  int partner_edge = -1;
  int channel = -1;
  std::int64_t delay_lo = 0;
  bool delay_lo_strict = false;
  std::int64_t delay_hi = -1;
  bool delay_hi_strict = false;
};

/// states.size() == steps.size() + 1.
struct Witness {
  std::vector<SymbolicState> states;
  std::vector<TraceStep> steps;
};

struct CmcVerdict {
  CmcResult result = CmcResult::Satisfied;
  std::optional<Witness> witness;
  PerfTriple stats;
  std::string limit;  // cap that was hit, e.g. "max-states=10"
};

enum class SearchOrder : std::uint8_t { Bfs, Dfs };

struct ZoneEngineOptions {
  ResourceCaps caps;
  bool subsumption = true;
  SearchOrder order = SearchOrder::Bfs;
};

/// Discrete successors of symbolic states, with time elapse folded in.
class ZoneGraph {
public:
  /// `extra_constants` (indexed by clock id) raise the extrapolation ceilings.
  explicit ZoneGraph(const Network& net, const std::vector<std::int64_t>& extra_constants = {});

  const Network& network() const noexcept { return net_; }
  int dim() const noexcept { return net_.clock_count() + 1; }

  SymbolicState initial() const;

  /// Enumerates successors in automaton, then edge, then partner order.
  /// Throws ModelError when an update leaves its variable's domain.
  void successors(const SymbolicState& s,
                  const std::function<void(SymbolicState&&, const TraceStep&)>& emit) const;

  /// Whether some valuation of `s` can never fire a transition, whatever it
  /// delays within the invariants.
  bool has_deadlock(const SymbolicState& s) const;

  /// Zones of `s` satisfying `pred` (a union of convex pieces, possibly empty).
  std::vector<Dbm> satisfying(const SymbolicState& s, const Expr& pred) const;
  bool intersects(const SymbolicState& s, const Expr& pred) const { return !satisfying(s, pred).empty(); }

  /// Bytes charged per stored state in the memory estimate.
  std::size_t footprint() const noexcept;

private:
  /// Discretely enabled transitions (automaton, edge, partner, partner
  /// edge; partner -1 for internal steps) in successor order.
  void transitions(const SymbolicState& s, const std::function<void(int, int, int, int)>& fn) const;
  bool apply_invariants(const std::vector<int>& locs, Dbm& z) const;
  void finish(SymbolicState& s) const;

  const Network& net_;
  std::vector<std::int64_t> ceiling_;
};

bool constrain(Dbm& z, const ClockConstraint& c);

/// E<> target: BFS (or DFS) with a passed list. Satisfied iff some reachable
/// state intersects the target; the witness leads to it.
CmcVerdict explore(const Network& net, const ExprPtr& target, const ZoneEngineOptions& opt = {});

/// Evaluates a bound classical query.
CmcVerdict check_query(const Network& net, const BoundQuery& q, const ZoneEngineOptions& opt = {});

/// Fills the delay windows of a witness by replaying it with an auxiliary
/// clock reset at every step.
void annotate_delays(const Network& net, Witness& w);

/// CSV with columns step,delay_lo,delay_hi,automaton,edge,channel.
std::string witness_csv(const Network& net, const Witness& w);

std::string describe_state(const Network& net, const SymbolicState& s);

}  // namespace twinverify
