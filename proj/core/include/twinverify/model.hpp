#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twinverify/expr.hpp"
#include "twinverify/timing.hpp"

namespace twinverify {

enum class Rel : std::uint8_t { Lt, Le, Eq, Ge, Gt };

const char* to_string(Rel r);

/// `clock ~ bound` when `other == 0`, otherwise `clock - other ~ bound`.
/// Clock ids start at 1; id 0 is the DBM reference clock.
struct ClockConstraint {
  int clock = 0;
  int other = 0;
  Rel rel = Rel::Le;
  std::int64_t bound = 0;

  bool is_difference() const noexcept { return other != 0; }
  friend bool operator==(const ClockConstraint&, const ClockConstraint&) = default;
};

enum class SyncKind : std::uint8_t { Internal, Emit, Receive };

struct Sync {
  SyncKind kind = SyncKind::Internal;
  int channel = -1;

  friend bool operator==(const Sync&, const Sync&) = default;
};

struct Update {
  int var = -1;
  ExprPtr value;
};

struct Edge {
  int source = 0;
  int target = 0;
  std::vector<ClockConstraint> clock_guard;
  std::vector<ExprPtr> data_guard;  // conjunction of clock-free predicates
  Sync sync;
  std::vector<int> resets;
  std::vector<Update> updates;
  SourcePos pos;

  /// Internal and emitting edges are taken on the automaton's own initiative;
  /// receiving edges only as the partner of an emit.
  bool is_active() const noexcept { return sync.kind != SyncKind::Receive; }
};

struct Delay {
  enum class Kind : std::uint8_t { None, Fixed, Empirical };
  Kind kind = Kind::None;
  std::int64_t fixed = 0;
  std::string distribution;

  static Delay none() { return {}; }
  static Delay fixed_ms(std::int64_t d) { return {Kind::Fixed, d, {}}; }
  static Delay empirical(std::string id) { return {Kind::Empirical, 0, std::move(id)}; }

  friend bool operator==(const Delay&, const Delay&) = default;
};

struct Location {
  std::string name;
  std::vector<ClockConstraint> invariant;
  Delay delay;
  std::optional<double> rate;  // exponential sojourn rate for unbounded locations
  SourcePos pos;
};

struct Automaton {
  std::string name;
  std::vector<Location> locations;
  std::vector<Edge> edges;
  int initial = 0;
  int sojourn_clock = 0;  // clock id, reset on entry to a location

  int find_location(std::string_view n) const;
};

struct ClockDecl {
  std::string name;   // global name; `Proc.t` for sojourn clocks
  int owner = -1;     // automaton index for sojourn clocks
  std::string local;  // name used inside the owning process
};

struct Variable {
  std::string name;
  std::int64_t min = 0;
  std::int64_t max = 1;
  std::int64_t init = 0;
};

/// A network of (stochastic) timed automata. Treated as immutable once
/// `finalize()` has run; all engines take it by const reference.
struct Network {
  std::vector<Automaton> automata;
  std::vector<ClockDecl> clocks;  // clock id i lives at clocks[i - 1]
  std::vector<std::string> channels;
  std::vector<Variable> variables;
  std::map<std::string, EmpiricalDistribution> distributions;
  std::map<std::string, std::string> distribution_files;  // id -> sidecar path, absent when inline
  std::vector<std::int64_t> max_constant;                 // indexed by clock id, slot 0 unused

  int clock_count() const noexcept { return static_cast<int>(clocks.size()); }
  int find_automaton(std::string_view n) const;
  int find_clock(std::string_view n) const;  // clock id or 0
  int find_variable(std::string_view n) const;
  int find_channel(std::string_view n) const;
  const std::string& clock_name(int id) const { return clocks.at(static_cast<std::size_t>(id - 1)).name; }

  /// Effective invariant of a location, including the implicit
  /// `sojourn <= d` of a Fixed(d) delay.
  std::vector<ClockConstraint> invariant_of(int automaton, int location) const;
  /// Clock guard of an edge, including the implicit `sojourn >= d` when the
  /// edge is active and leaves a Fixed(d) location.
  std::vector<ClockConstraint> guard_of(int automaton, int edge) const;
  /// Whether taking the edge resets the automaton's sojourn clock: active
  /// edges always do, receiving edges only when they change location.
  bool resets_sojourn(int automaton, int edge) const;

  bool has_empirical_delays() const;

  /// Recomputes derived data (max constants).
  void finalize();
};

class ModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Loads a sidecar histogram referenced from a model file.
using DistributionLoader = std::function<EmpiricalDistribution(const std::string& path)>;

/// Loader resolving paths relative to `base_dir`.
DistributionLoader file_loader(std::filesystem::path base_dir);

/// Parses the `.tvm` format (see docs/model-format.md). Throws ParseError
/// carrying every positioned diagnostic found.
Network parse_model(std::string_view text, const DistributionLoader& loader = {});

Network load_model(const std::filesystem::path& path);

/// Serializes a network back into `.tvm` text. parse_model(render_model(n))
/// is structurally equal to n.
std::string render_model(const Network& net);

std::string render_constraint(const Network& net, const ClockConstraint& c, int context_automaton = -1);

/// Structural validation. Empty iff the network is well formed. Codes:
/// INV_NOT_UPPER, CHAN_UNPAIRED, DIST_UNRESOLVED, VAR_DOMAIN, VAR_INIT_RANGE,
/// UPDATE_RANGE, DIFF_SAME_CLOCK, FIXED_NEGATIVE, RATE_INVALID, NO_LOCATIONS.
std::vector<Diagnostic> validate(const Network& net);

/// CMC-mode model: every Empirical delay becomes Fixed(weighted_average).
/// Throws ModelError for a missing distribution id.
Network to_approximate(const Network& net);

bool structurally_equal(const Network& a, const Network& b);

}  // namespace twinverify
