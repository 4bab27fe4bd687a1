#include "twinverify/smc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace twinverify {

const char* to_string(EndReason r) {
  switch (r) {
    case EndReason::TimeBound: return "time-bound";
    case EndReason::StepBound: return "step-bound";
    case EndReason::Stuck: return "stuck";
  }
  return "?";
}

const char* to_string(TestOutcome t) {
  switch (t) {
    case TestOutcome::AcceptH0: return "accept-H0";
    case TestOutcome::AcceptH1: return "accept-H1";
    case TestOutcome::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Strict and non-strict clock bounds differ on a null set; sampled times are
// compared against the closure.
constexpr double kTol = 1e-9;

bool holds(const ClockConstraint& c, const std::vector<double>& clocks) {
  const double v = clocks[static_cast<std::size_t>(c.clock)] - clocks[static_cast<std::size_t>(c.other)];
  const double k = static_cast<double>(c.bound);
  switch (c.rel) {
    case Rel::Lt:
    case Rel::Le: return v <= k + kTol;
    case Rel::Ge:
    case Rel::Gt: return v >= k - kTol;
    case Rel::Eq: return std::abs(v - k) <= kTol;
  }
  return false;
}

class Simulator {
public:
  Simulator(const Network& net, std::uint64_t seed) : net_(net), rng_(seed) {
    const std::size_t n = net.automata.size();
    s_.locs.resize(n);
    for (std::size_t a = 0; a < n; ++a) s_.locs[a] = net.automata[a].initial;
    for (const auto& v : net.variables) s_.vars.push_back(v.init);
    s_.clocks.assign(static_cast<std::size_t>(net.clock_count()) + 1, 0.0);
    fire_at_.assign(n, kInf);
    entry_.assign(n, 0.0);
    sojourn_.assign(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) enter(static_cast<int>(a));
  }

  Trace run(double time_bound, std::uint64_t step_bound) {
    Trace tr;
    tr.initial = s_;
    const std::size_t n = net_.automata.size();
    while (true) {
      double best = kInf;
      for (double t : fire_at_) best = std::min(best, t);
      if (best == kInf) {
        tr.end_reason = EndReason::Stuck;
        tr.end_time = now_;
        return tr;
      }
      if (best > time_bound) {
        tr.end_reason = EndReason::TimeBound;
        tr.end_time = time_bound;
        return tr;
      }
      advance(best);
      std::vector<int> ready;
      for (std::size_t a = 0; a < n; ++a)
        if (fire_at_[a] == best) ready.push_back(static_cast<int>(a));
      const int a = ready.size() == 1 ? ready[0] : ready[rng_.index(ready.size())];
      auto event = fire(a);
      if (!event) {
        fire_at_[static_cast<std::size_t>(a)] = kInf;
        continue;
      }
      event->post = s_;
      tr.events.push_back(std::move(*event));
      if (tr.events.size() >= step_bound) {
        tr.end_reason = EndReason::StepBound;
        tr.end_time = now_;
        return tr;
      }
    }
  }

private:
  struct Choice {
    int edge;
    std::vector<std::pair<int, int>> receivers;
  };

  EvalContext ctx() const {
    EvalContext c;
    c.locations = s_.locs;
    c.vars = s_.vars;
    return c;
  }

  bool data_ok(const Edge& e) const {
    const EvalContext c = ctx();
    for (const auto& g : e.data_guard)
      if (!eval_bool(*g, c)) return false;
    return true;
  }

  bool edge_enabled(int a, int e) const {
    const Edge& edge = net_.automata[static_cast<std::size_t>(a)].edges[static_cast<std::size_t>(e)];
    if (edge.source != s_.locs[static_cast<std::size_t>(a)] || !data_ok(edge)) return false;
    for (const auto& c : net_.guard_of(a, e))
      if (!holds(c, s_.clocks)) return false;
    return true;
  }

  std::vector<Choice> choices(int a) const {
    std::vector<Choice> out;
    const Automaton& aut = net_.automata[static_cast<std::size_t>(a)];
    for (int e = 0; e < static_cast<int>(aut.edges.size()); ++e) {
      const Edge& edge = aut.edges[static_cast<std::size_t>(e)];
      if (!edge.is_active() || !edge_enabled(a, e)) continue;
      Choice c{e, {}};
      if (edge.sync.kind == SyncKind::Emit) {
        for (int b = 0; b < static_cast<int>(net_.automata.size()); ++b) {
          if (b == a) continue;
          const Automaton& other = net_.automata[static_cast<std::size_t>(b)];
          for (int f = 0; f < static_cast<int>(other.edges.size()); ++f) {
            const Edge& r = other.edges[static_cast<std::size_t>(f)];
            if (r.sync.kind == SyncKind::Receive && r.sync.channel == edge.sync.channel && edge_enabled(b, f))
              c.receivers.emplace_back(b, f);
          }
        }
        if (c.receivers.empty()) continue;
      }
      out.push_back(std::move(c));
    }
    return out;
  }

  void advance(double t) {
    const double dt = t - now_;
    for (std::size_t i = 1; i < s_.clocks.size(); ++i) s_.clocks[i] += dt;
    now_ = t;
  }

  /// Earliest and latest delay from now at which some active edge's clock
  /// guard can hold, capped by the invariant. Nullopt when none can.
  std::optional<std::pair<double, double>> window(int a) const {
    const Automaton& aut = net_.automata[static_cast<std::size_t>(a)];
    const int loc = s_.locs[static_cast<std::size_t>(a)];
    double inv_hi = kInf;
    for (const auto& c : net_.invariant_of(a, loc))
      if (!c.is_difference())
        inv_hi = std::min(inv_hi, static_cast<double>(c.bound) - s_.clocks[static_cast<std::size_t>(c.clock)]);
    inv_hi = std::max(inv_hi, 0.0);
    double earliest = kInf;
    double latest = -kInf;
    for (int e = 0; e < static_cast<int>(aut.edges.size()); ++e) {
      const Edge& edge = aut.edges[static_cast<std::size_t>(e)];
      if (edge.source != loc || !edge.is_active() || !data_ok(edge)) continue;
      double lo = 0;
      double hi = inv_hi;
      bool possible = true;
      for (const auto& c : net_.guard_of(a, e)) {
        if (c.is_difference()) {
          possible = possible && holds(c, s_.clocks);
          continue;
        }
        const double gap = static_cast<double>(c.bound) - s_.clocks[static_cast<std::size_t>(c.clock)];
        if (c.rel == Rel::Lt || c.rel == Rel::Le || c.rel == Rel::Eq) hi = std::min(hi, gap);
        if (c.rel == Rel::Gt || c.rel == Rel::Ge || c.rel == Rel::Eq) lo = std::max(lo, gap);
      }
      if (!possible || lo > hi + kTol) continue;
      earliest = std::min(earliest, lo);
      latest = std::max(latest, std::max(lo, hi));
    }
    if (earliest == kInf) return std::nullopt;
    return std::make_pair(earliest, latest);
  }

  /// Samples the sojourn of automaton a in its (new) location.
  void enter(int a) {
    const auto ai = static_cast<std::size_t>(a);
    const Location& loc = net_.automata[ai].locations[static_cast<std::size_t>(s_.locs[ai])];
    entry_[ai] = now_;
    switch (loc.delay.kind) {
      case Delay::Kind::Fixed:
        sojourn_[ai] = static_cast<double>(loc.delay.fixed);
        fire_at_[ai] = now_ + sojourn_[ai];
        return;
      case Delay::Kind::Empirical:
        sojourn_[ai] = net_.distributions.at(loc.delay.distribution).sample(rng_);
        fire_at_[ai] = now_ + sojourn_[ai];
        return;
      case Delay::Kind::None:
        schedule_window(a);
        return;
    }
  }

  void schedule_window(int a) {
    const auto ai = static_cast<std::size_t>(a);
    const Location& loc = net_.automata[ai].locations[static_cast<std::size_t>(s_.locs[ai])];
    const auto w = window(a);
    if (!w) {
      fire_at_[ai] = kInf;
      return;
    }
    const auto [lo, hi] = *w;
    if (hi == kInf) fire_at_[ai] = now_ + lo + rng_.exponential(loc.rate.value_or(kDefaultExponentialRate));
    else fire_at_[ai] = now_ + (hi > lo ? rng_.uniform(lo, hi) : lo);
  }

  /// Re-examines a blocked automaton after the state changed.
  void revisit(int a) {
    const auto ai = static_cast<std::size_t>(a);
    const Location& loc = net_.automata[ai].locations[static_cast<std::size_t>(s_.locs[ai])];
    if (loc.delay.kind == Delay::Kind::None) {
      schedule_window(a);
    } else if (!choices(a).empty()) {
      fire_at_[ai] = std::max(now_, entry_[ai] + sojourn_[ai]);
    }
  }

  void apply(int a, int e) {
    const Automaton& aut = net_.automata[static_cast<std::size_t>(a)];
    const Edge& edge = aut.edges[static_cast<std::size_t>(e)];
    for (const auto& u : edge.updates) {
      const std::int64_t v = eval_int(*u.value, ctx());
      const Variable& decl = net_.variables[static_cast<std::size_t>(u.var)];
      if (v < decl.min || v > decl.max)
        throw ModelError("update " + decl.name + " = " + std::to_string(v) + " leaves its domain at " +
                         to_string(edge.pos));
      s_.vars[static_cast<std::size_t>(u.var)] = v;
    }
  }

  void jump(int a, int e, bool& global_reset) {
    const Automaton& aut = net_.automata[static_cast<std::size_t>(a)];
    const Edge& edge = aut.edges[static_cast<std::size_t>(e)];
    for (int c : edge.resets) {
      s_.clocks[static_cast<std::size_t>(c)] = 0.0;
      if (c != aut.sojourn_clock) global_reset = true;
    }
    if (net_.resets_sojourn(a, e)) s_.clocks[static_cast<std::size_t>(aut.sojourn_clock)] = 0.0;
    s_.locs[static_cast<std::size_t>(a)] = edge.target;
  }

  std::optional<TraceEvent> fire(int a) {
    const auto options = choices(a);
    if (options.empty()) return std::nullopt;
    const Choice& c = options.size() == 1 ? options[0] : options[rng_.index(options.size())];
    std::pair<int, int> partner{-1, -1};
    if (!c.receivers.empty())
      partner = c.receivers.size() == 1 ? c.receivers[0] : c.receivers[rng_.index(c.receivers.size())];

    TraceEvent ev;
    ev.time = now_;
    const Edge& edge = net_.automata[static_cast<std::size_t>(a)].edges[static_cast<std::size_t>(c.edge)];
    ev.channel = edge.sync.kind == SyncKind::Emit ? edge.sync.channel : -1;
    ev.automata.push_back(a);
    ev.edges.push_back(c.edge);
    if (partner.first >= 0) {
      ev.automata.push_back(partner.first);
      ev.edges.push_back(partner.second);
    }

    const std::vector<std::int64_t> before = s_.vars;
    apply(a, c.edge);
    if (partner.first >= 0) apply(partner.first, partner.second);
    bool global_reset = false;
    const int partner_loc = partner.first >= 0 ? s_.locs[static_cast<std::size_t>(partner.first)] : -1;
    jump(a, c.edge, global_reset);
    if (partner.first >= 0) jump(partner.first, partner.second, global_reset);

    const bool vars_changed = before != s_.vars;
    enter(a);
    if (partner.first >= 0 && s_.locs[static_cast<std::size_t>(partner.first)] != partner_loc) enter(partner.first);

    // Blocked automata are re-examined after every event; delay-free
    // locations also re-sample when data or shared clocks changed.
    for (std::size_t b = 0; b < net_.automata.size(); ++b) {
      const int bi = static_cast<int>(b);
      if (bi == a || (bi == partner.first && s_.locs[b] != partner_loc)) continue;
      if (fire_at_[b] == kInf) {
        revisit(bi);
        continue;
      }
      const Location& loc = net_.automata[b].locations[static_cast<std::size_t>(s_.locs[b])];
      if ((vars_changed || global_reset) && loc.delay.kind == Delay::Kind::None) schedule_window(bi);
    }
    return ev;
  }

  const Network& net_;
  Rng rng_;
  Snapshot s_;
  double now_ = 0;
  std::vector<double> fire_at_;
  std::vector<double> entry_;
  std::vector<double> sojourn_;
};

}  // namespace

Trace simulate_run(const Network& net, double time_bound, std::uint64_t step_bound, std::uint64_t seed) {
  for (const auto& aut : net.automata)
    for (const auto& loc : aut.locations)
      if (loc.delay.kind == Delay::Kind::Empirical && !net.distributions.count(loc.delay.distribution))
        throw ModelError("unresolved distribution '" + loc.delay.distribution + "'");
  return Simulator(net, seed).run(time_bound, step_bound);
}

namespace {

/// Visits the instants of [0, bound] at which the truth of any clock
/// comparison in `shape` may change, plus one interior point per piece. The
/// callback returns false to stop early.
template <class F>
void for_each_sample(const Expr& shape, const Trace& tr, double bound, F&& f) {
  if (tr.end_reason != EndReason::Stuck && tr.end_time + kTol < bound)
    throw HorizonError("trace ends at " + format_number(tr.end_time) + " before the monitor bound " +
                       format_number(bound));
  std::vector<const Expr*> atoms;
  for_each_clock_comparison(shape, [&](const Expr& cmp) { atoms.push_back(&cmp); });
  std::vector<double> clocks;
  std::vector<double> points;
  auto at = [&](const Snapshot& s, double offset, int channel) {
    clocks = s.clocks;
    for (std::size_t i = 1; i < clocks.size(); ++i) clocks[i] += offset;
    EvalContext ctx;
    ctx.locations = s.locs;
    ctx.vars = s.vars;
    ctx.clocks = clocks;
    ctx.event_channel = channel;
    return ctx;
  };
  const std::size_t segments = tr.events.size() + 1;
  for (std::size_t i = 0; i < segments; ++i) {
    const double start = tr.segment_start(i);
    if (start > bound) return;
    double end = i < tr.events.size() ? tr.events[i].time : (tr.end_reason == EndReason::Stuck ? bound : tr.end_time);
    end = std::min(end, bound);
    const Snapshot& s = tr.segment_state(i);
    const int channel = i == 0 ? -1 : tr.events[i - 1].channel;
    if (!f(at(s, 0.0, channel))) return;
    const double len = end - start;
    if (!(len > 0)) continue;
    points.assign({0.0, len});
    for (const Expr* cmp : atoms) {
      const EvalContext c0 = at(s, 0.0, -1);
      const double f0 = eval_real(*cmp->args[0], c0) - eval_real(*cmp->args[1], c0);
      const EvalContext c1 = at(s, 1.0, -1);
      const double slope = eval_real(*cmp->args[0], c1) - eval_real(*cmp->args[1], c1) - f0;
      if (slope == 0.0) continue;
      const double root = -f0 / slope;
      if (root > 0.0 && root < len) points.push_back(root);
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    for (std::size_t k = 1; k < points.size(); ++k) {
      if (!f(at(s, 0.5 * (points[k - 1] + points[k]), -1))) return;
      if (!f(at(s, points[k], -1))) return;
    }
  }
}

bool truth(const Expr& e, const EvalContext& ctx) { return eval_real(e, ctx) != 0.0; }

}  // namespace

bool evaluate(const Monitor& m, const Trace& tr) {
  const double bound = static_cast<double>(m.bound);
  const Expr& p = *m.predicate;
  if (m.shape == MonitorShape::EventuallyWithin) {
    bool seen = false;
    for_each_sample(p, tr, bound, [&](const EvalContext& ctx) {
      seen = truth(p, ctx);
      return !seen;
    });
    return seen;
  }
  bool ok = true;
  for_each_sample(p, tr, bound, [&](const EvalContext& ctx) {
    ok = truth(p, ctx);
    return ok;
  });
  return ok;
}

double reduce_value(const Expr& e, Reduce reduce, double bound, const Trace& tr) {
  double best = reduce == Reduce::Max ? -kInf : kInf;
  for_each_sample(e, tr, bound, [&](const EvalContext& ctx) {
    const double v = eval_real(e, ctx);
    best = reduce == Reduce::Max ? std::max(best, v) : std::min(best, v);
    return true;
  });
  return best;
}

namespace {

struct RunOutcome {
  std::uint64_t steps = 0;
  std::uint64_t events = 0;
  bool first = false;
  bool second = false;
  double value = 0;
  std::vector<TrajectoryPoint> points;
};

std::uint64_t snapshot_bytes(const Network& net) {
  return sizeof(TraceEvent) + net.automata.size() * (sizeof(int) * 2 + sizeof(int)) +
         net.variables.size() * sizeof(std::int64_t) + (static_cast<std::size_t>(net.clock_count()) + 1) * sizeof(double);
}

/// Evaluates runs [first, first + count) on up to `workers` threads; results
/// are returned in run-index order whatever the scheduling.
template <class F>
std::vector<RunOutcome> run_batch(std::uint64_t first, std::uint64_t count, unsigned workers, F&& f) {
  std::vector<RunOutcome> out(count);
  const unsigned threads = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, workers), count));
  if (threads <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) out[i] = f(first + i);
    return out;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::uint64_t i; (i = next.fetch_add(1)) < count;) {
        try {
          out[i] = f(first + i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

class Accounting {
public:
  explicit Accounting(const Network& net) : bytes_(snapshot_bytes(net)) {}
  void add(const RunOutcome& r) {
    steps_ += r.steps;
    peak_events_ = std::max(peak_events_, r.events + 1);
  }
  PerfTriple stats(const CpuTimer& t) const { return {steps_, t.elapsed_ms(), (peak_events_ * bytes_ + 1023) / 1024}; }

private:
  std::uint64_t bytes_;
  std::uint64_t steps_ = 0;
  std::uint64_t peak_events_ = 0;
};

Trace trace_for(const Network& net, double bound, const SmcOptions& opt, std::uint64_t run) {
  return simulate_run(net, bound, opt.step_bound, derive_seed(opt.seed, run));
}

void check_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw ParameterError(std::string(name) + " must lie in (0,1)");
}

/// Runs a sequential test in run-index order, `workers` runs at a time;
/// `consume` returns true to stop. Only consumed runs are accounted.
template <class Run, class Consume>
void sequential(const SmcOptions& opt, Accounting& acc, Run&& run, Consume&& consume) {
  const std::uint64_t batch = std::max(1u, opt.workers);
  for (std::uint64_t first = 0; first < opt.max_runs; first += batch) {
    const auto outs = run_batch(first, std::min(batch, opt.max_runs - first), opt.workers, run);
    for (const auto& o : outs) {
      acc.add(o);
      if (consume(o)) return;
    }
  }
}

}  // namespace

SmcVerdict estimate_probability(const Network& net, const Monitor& m, const SmcOptions& opt, Direction direction) {
  CpuTimer timer;
  check_unit(opt.alpha, "alpha");
  std::uint64_t n = 0;
  if (opt.runs) {
    if (*opt.runs == 0) throw ParameterError("runs must be positive");
    n = *opt.runs;
  } else {
    n = chernoff_runs(opt.epsilon, opt.alpha);
  }
  const double bound = static_cast<double>(m.bound);
  const auto outs = run_batch(0, n, opt.workers, [&](std::uint64_t i) {
    const Trace tr = trace_for(net, bound, opt, i);
    RunOutcome o;
    o.steps = o.events = tr.events.size();
    o.first = evaluate(m, tr);
    return o;
  });
  Accounting acc(net);
  SmcVerdict v;
  v.kind = SmcKind::ProbBound;
  for (const auto& o : outs) {
    acc.add(o);
    v.successes += o.first ? 1 : 0;
  }
  v.runs = n;
  v.interval = clopper_pearson(v.successes, n, opt.alpha);
  v.confidence = 1.0 - opt.alpha;
  if (direction == Direction::Auto)
    direction = 2 * v.successes >= n ? Direction::AtLeast : Direction::AtMost;
  v.direction = direction;
  v.bound = direction == Direction::AtLeast ? v.interval.lower : v.interval.upper;
  v.mean = static_cast<double>(v.successes) / static_cast<double>(n);
  v.alpha = opt.alpha;
  v.seed = opt.seed;
  v.stats = acc.stats(timer);
  return v;
}

SmcVerdict hypothesis_test(const Network& net, const Monitor& m, Direction direction, double theta,
                           const SmcOptions& opt) {
  CpuTimer timer;
  check_unit(opt.alpha, "alpha");
  check_unit(opt.beta, "beta");
  if (!(opt.delta > 0.0)) throw ParameterError("delta must be positive");
  if (!(theta - opt.delta > 0.0) || !(theta + opt.delta < 1.0))
    throw ParameterError("hypothesis test needs 0 < theta - delta and theta + delta < 1");
  Sprt sprt(theta - opt.delta, theta + opt.delta, opt.alpha, opt.beta);
  const double bound = static_cast<double>(m.bound);
  Accounting acc(net);
  SmcVerdict v;
  v.kind = SmcKind::TestResult;
  sequential(
      opt, acc,
      [&](std::uint64_t i) {
        const Trace tr = trace_for(net, bound, opt, i);
        RunOutcome o;
        o.steps = o.events = tr.events.size();
        o.first = evaluate(m, tr);
        return o;
      },
      [&](const RunOutcome& o) {
        ++v.runs;
        v.successes += o.first ? 1 : 0;
        return sprt.add(o.first) != SprtDecision::Continue;
      });
  v.outcome = sprt.decision() == SprtDecision::AcceptH1   ? TestOutcome::AcceptH1
              : sprt.decision() == SprtDecision::AcceptH0 ? TestOutcome::AcceptH0
                                                          : TestOutcome::Inconclusive;
  v.direction = direction == Direction::Auto ? Direction::AtLeast : direction;
  v.bound = theta;
  v.alpha = opt.alpha;
  v.beta = opt.beta;
  v.confidence = 1.0 - opt.alpha;
  switch (v.outcome) {
    case TestOutcome::AcceptH1: v.hypothesis = "Pr >= " + format_number(theta + opt.delta); break;
    case TestOutcome::AcceptH0: v.hypothesis = "Pr <= " + format_number(theta - opt.delta); break;
    case TestOutcome::Inconclusive: v.hypothesis = "run cap reached"; break;
  }
  v.mean = v.runs ? static_cast<double>(v.successes) / static_cast<double>(v.runs) : 0.0;
  v.seed = opt.seed;
  v.stats = acc.stats(timer);
  return v;
}

SmcVerdict compare_probability(const Network& net, const Monitor& m1, const Monitor& m2, const SmcOptions& opt) {
  CpuTimer timer;
  check_unit(opt.alpha, "alpha");
  check_unit(opt.beta, "beta");
  if (m1.bound != m2.bound) throw ParameterError("compared monitors must share a time bound");
  if (!(opt.compare_delta > 0.0 && opt.compare_delta < 0.5))
    throw ParameterError("comparison indifference must lie in (0,0.5)");
  Sprt sprt(0.5 - opt.compare_delta, 0.5 + opt.compare_delta, opt.alpha, opt.beta);
  const double bound = static_cast<double>(m1.bound);
  Accounting acc(net);
  SmcVerdict v;
  v.kind = SmcKind::TestResult;
  std::uint64_t first_wins = 0;
  std::uint64_t second_wins = 0;
  sequential(
      opt, acc,
      [&](std::uint64_t i) {
        const Trace tr = trace_for(net, bound, opt, i);
        RunOutcome o;
        o.steps = o.events = tr.events.size();
        o.first = evaluate(m1, tr);
        o.second = evaluate(m2, tr);
        return o;
      },
      [&](const RunOutcome& o) {
        ++v.runs;
        if (o.first == o.second) return false;
        ++(o.first ? first_wins : second_wins);
        return sprt.add(o.first) != SprtDecision::Continue;
      });
  v.outcome = sprt.decision() == SprtDecision::AcceptH1   ? TestOutcome::AcceptH1
              : sprt.decision() == SprtDecision::AcceptH0 ? TestOutcome::AcceptH0
                                                          : TestOutcome::Inconclusive;
  v.successes = first_wins;
  switch (v.outcome) {
    case TestOutcome::AcceptH1: v.hypothesis = "Pr(first) >= Pr(second)"; break;
    case TestOutcome::AcceptH0: v.hypothesis = "Pr(first) < Pr(second)"; break;
    case TestOutcome::Inconclusive: v.hypothesis = "run cap reached"; break;
  }
  v.direction = Direction::AtLeast;
  v.alpha = opt.alpha;
  v.beta = opt.beta;
  v.confidence = 1.0 - opt.alpha;
  v.seed = opt.seed;
  v.stats = acc.stats(timer);
  return v;
}

SmcVerdict estimate_value(const Network& net, const Expr& e, Reduce reduce, double bound, std::uint64_t runs,
                          const SmcOptions& opt) {
  CpuTimer timer;
  if (runs < 2) throw ParameterError("value estimation needs at least 2 runs");
  if (!(bound > 0)) throw ParameterError("time bound must be positive");
  const auto outs = run_batch(0, runs, opt.workers, [&](std::uint64_t i) {
    const Trace tr = trace_for(net, bound, opt, i);
    RunOutcome o;
    o.steps = o.events = tr.events.size();
    o.value = reduce_value(e, reduce, bound, tr);
    return o;
  });
  Accounting acc(net);
  RunningStats rs;
  for (const auto& o : outs) {
    acc.add(o);
    rs.add(o.value);
  }
  SmcVerdict v;
  v.kind = SmcKind::Estimate;
  v.runs = runs;
  v.mean = rs.mean();
  v.confidence = 0.95;
  v.half_width = normal_quantile(0.975) * std::sqrt(rs.sample_variance() / static_cast<double>(runs));
  v.seed = opt.seed;
  v.stats = acc.stats(timer);
  return v;
}

SmcVerdict simulate_query(const Network& net, std::uint64_t runs, double bound, const std::vector<ExprPtr>& exprs,
                          const SmcOptions& opt) {
  CpuTimer timer;
  if (runs < 1) throw ParameterError("simulation needs at least 1 run");
  if (!(bound > 0)) throw ParameterError("time bound must be positive");
  const auto outs = run_batch(0, runs, opt.workers, [&](std::uint64_t i) {
    const Trace tr = trace_for(net, bound, opt, i);
    RunOutcome o;
    o.steps = o.events = tr.events.size();
    std::vector<double> clocks;
    auto record = [&](const Snapshot& s, double time, int channel) {
      EvalContext ctx;
      ctx.locations = s.locs;
      ctx.vars = s.vars;
      ctx.clocks = s.clocks;
      ctx.event_channel = channel;
      for (std::size_t k = 0; k < exprs.size(); ++k) o.points.push_back({i, time, k, eval_real(*exprs[k], ctx)});
    };
    record(tr.initial, 0.0, -1);
    for (const auto& ev : tr.events) {
      if (ev.time > bound) break;
      record(ev.post, ev.time, ev.channel);
    }
    return o;
  });
  Accounting acc(net);
  SmcVerdict v;
  v.kind = SmcKind::Trajectories;
  v.runs = runs;
  for (const auto& e : exprs) v.expr_names.push_back(render(e));
  for (const auto& o : outs) {
    acc.add(o);
    v.points.insert(v.points.end(), o.points.begin(), o.points.end());
  }
  v.seed = opt.seed;
  v.stats = acc.stats(timer);
  return v;
}

SmcVerdict run_smc_query(const Network& net, const BoundQuery& q, const SmcOptions& opt) {
  require_engine(q, Engine::Statistical);
  const QueryAst& a = q.ast;
  switch (a.kind) {
    case QueryKind::ProbEstimate: return estimate_probability(net, a.m1, opt, Direction::Auto);
    case QueryKind::ProbTest: return hypothesis_test(net, a.m1, a.direction, a.threshold, opt);
    case QueryKind::ProbCompare: return compare_probability(net, a.m1, a.m2, opt);
    case QueryKind::ValueEstimate:
      return estimate_value(net, *a.value, a.reduce, static_cast<double>(a.time_bound), static_cast<std::uint64_t>(a.runs),
                            opt);
    case QueryKind::Simulate:
      return simulate_query(net, static_cast<std::uint64_t>(a.runs), static_cast<double>(a.time_bound), a.exprs, opt);
    default: break;
  }
  throw ParseError({{"ENGINE_MISMATCH", "not a statistical query", a.pos, render_query(a)}});
}

bool SmcVerdict::holds() const {
  switch (kind) {
    case SmcKind::TestResult:
      if (outcome == TestOutcome::Inconclusive) return true;
      return (outcome == TestOutcome::AcceptH1) == (direction != Direction::AtMost);
    default: return true;
  }
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string render_verdict(const SmcVerdict& v) {
  switch (v.kind) {
    case SmcKind::ProbBound:
      return std::string(v.direction == Direction::AtMost ? "Pr <= " : "Pr >= ") + format_number(v.bound);
    case SmcKind::Estimate: {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.2f +/- %.2f", v.mean, v.half_width);
      return buf;
    }
    case SmcKind::TestResult: return std::string(to_string(v.outcome)) + ": " + v.hypothesis;
    case SmcKind::Trajectories:
      return std::to_string(v.runs) + " trajectories, " + std::to_string(v.points.size()) + " samples";
  }
  return {};
}

namespace {

std::string precise(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string trajectory_csv(const SmcVerdict& v) {
  std::ostringstream os;
  os << "run,time_ms,expr_name,value\n";
  for (const auto& p : v.points) {
    const std::string& name = v.expr_names[p.expr];
    const bool quote = name.find_first_of(",\"") != std::string::npos;
    os << p.run << ',' << precise(p.time) << ',';
    if (quote) {
      os << '"';
      for (char c : name) os << (c == '"' ? "\"\"" : std::string(1, c));
      os << '"';
    } else {
      os << name;
    }
    os << ',' << precise(p.value) << '\n';
  }
  return os.str();
}

}  // namespace twinverify
