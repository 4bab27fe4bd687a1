#include "twinverify/zone_engine.hpp"

#include <algorithm>
#include <cstring>
#include <deque>
#include <sstream>
#include <unordered_map>

namespace twinverify {

const char* to_string(CmcResult r) {
  switch (r) {
    case CmcResult::Satisfied: return "Satisfied";
    case CmcResult::NotSatisfied: return "NotSatisfied";
    case CmcResult::ResourceLimit: return "ResourceLimit";
  }
  return "?";
}

bool constrain(Dbm& z, const ClockConstraint& c) {
  const int i = c.clock;
  const int j = c.other;
  switch (c.rel) {
    case Rel::Lt: return z.constrain(i, j, Bound::lt(c.bound));
    case Rel::Le: return z.constrain(i, j, Bound::le(c.bound));
    case Rel::Ge: return z.constrain(j, i, Bound::le(-c.bound));
    case Rel::Gt: return z.constrain(j, i, Bound::lt(-c.bound));
    case Rel::Eq: return z.constrain(i, j, Bound::le(c.bound)) && z.constrain(j, i, Bound::le(-c.bound));
  }
  return false;
}

ZoneGraph::ZoneGraph(const Network& net, const std::vector<std::int64_t>& extra_constants)
    : net_(net), ceiling_(static_cast<std::size_t>(net.clock_count()) + 1, 0) {
  for (std::size_t i = 1; i < ceiling_.size(); ++i) {
    if (i < net.max_constant.size()) ceiling_[i] = net.max_constant[i];
    if (i < extra_constants.size()) ceiling_[i] = std::max(ceiling_[i], extra_constants[i]);
  }
}

std::size_t ZoneGraph::footprint() const noexcept {
  const auto d = static_cast<std::size_t>(dim());
  return d * d * sizeof(Bound::raw_type) + net_.automata.size() * sizeof(int) +
         net_.variables.size() * sizeof(std::int64_t) + 64;
}

bool ZoneGraph::apply_invariants(const std::vector<int>& locs, Dbm& z) const {
  for (std::size_t a = 0; a < locs.size(); ++a)
    for (const auto& c : net_.invariant_of(static_cast<int>(a), locs[a]))
      if (!constrain(z, c)) return false;
  return true;
}

void ZoneGraph::finish(SymbolicState& s) const {
  if (!apply_invariants(s.locs, s.zone)) return;
  s.zone.up();
  if (!apply_invariants(s.locs, s.zone)) return;
  s.zone.extrapolate(ceiling_);
}

SymbolicState ZoneGraph::initial() const {
  SymbolicState s;
  for (const auto& a : net_.automata) s.locs.push_back(a.initial);
  for (const auto& v : net_.variables) s.vars.push_back(v.init);
  s.zone = Dbm::zero(dim());
  finish(s);
  return s;
}

namespace {

EvalContext context(const SymbolicState& s) {
  EvalContext ctx;
  ctx.locations = s.locs;
  ctx.vars = s.vars;
  return ctx;
}

bool data_guard_holds(const Edge& e, const SymbolicState& s) {
  const EvalContext ctx = context(s);
  for (const auto& g : e.data_guard)
    if (!eval_bool(*g, ctx)) return false;
  return true;
}

void apply_updates(const Network& net, const Edge& e, std::vector<std::int64_t>& vars, const std::vector<int>& locs) {
  for (const auto& u : e.updates) {
    EvalContext ctx;
    ctx.locations = locs;
    ctx.vars = vars;
    const std::int64_t v = eval_int(*u.value, ctx);
    const Variable& decl = net.variables[static_cast<std::size_t>(u.var)];
    if (v < decl.min || v > decl.max)
      throw ModelError("update " + decl.name + " = " + std::to_string(v) + " leaves domain [" +
                       std::to_string(decl.min) + "," + std::to_string(decl.max) + "] at " + to_string(e.pos));
    vars[static_cast<std::size_t>(u.var)] = v;
  }
}

}  // namespace

void ZoneGraph::transitions(const SymbolicState& s, const std::function<void(int, int, int, int)>& fn) const {
  const int n = static_cast<int>(net_.automata.size());
  for (int a = 0; a < n; ++a) {
    const Automaton& aut = net_.automata[static_cast<std::size_t>(a)];
    for (int e = 0; e < static_cast<int>(aut.edges.size()); ++e) {
      const Edge& edge = aut.edges[static_cast<std::size_t>(e)];
      if (edge.source != s.locs[static_cast<std::size_t>(a)] || !edge.is_active()) continue;
      if (!data_guard_holds(edge, s)) continue;
      if (edge.sync.kind == SyncKind::Internal) {
        fn(a, e, -1, -1);
        continue;
      }
      for (int b = 0; b < n; ++b) {
        if (b == a) continue;
        const Automaton& other = net_.automata[static_cast<std::size_t>(b)];
        for (int f = 0; f < static_cast<int>(other.edges.size()); ++f) {
          const Edge& recv = other.edges[static_cast<std::size_t>(f)];
          if (recv.source != s.locs[static_cast<std::size_t>(b)] || recv.sync.kind != SyncKind::Receive ||
              recv.sync.channel != edge.sync.channel)
            continue;
          if (data_guard_holds(recv, s)) fn(a, e, b, f);
        }
      }
    }
  }
}

void ZoneGraph::successors(const SymbolicState& s,
                           const std::function<void(SymbolicState&&, const TraceStep&)>& emit) const {
  auto take = [&](SymbolicState& next, int a, int e) -> bool {
    for (const auto& c : net_.guard_of(a, e))
      if (!constrain(next.zone, c)) return false;
    return true;
  };
  auto resets = [&](SymbolicState& next, int a, int e) {
    const Automaton& aut = net_.automata[static_cast<std::size_t>(a)];
    const Edge& edge = aut.edges[static_cast<std::size_t>(e)];
    for (int c : edge.resets) next.zone.reset(c);
    if (net_.resets_sojourn(a, e)) next.zone.reset(aut.sojourn_clock);
    next.locs[static_cast<std::size_t>(a)] = edge.target;
  };
  transitions(s, [&](int a, int e, int b, int f) {
    SymbolicState next = s;
    if (!take(next, a, e) || (b >= 0 && !take(next, b, f))) return;
    const Edge& edge = net_.automata[static_cast<std::size_t>(a)].edges[static_cast<std::size_t>(e)];
    apply_updates(net_, edge, next.vars, next.locs);
    if (b >= 0) apply_updates(net_, net_.automata[static_cast<std::size_t>(b)].edges[static_cast<std::size_t>(f)],
                              next.vars, next.locs);
    resets(next, a, e);
    if (b >= 0) resets(next, b, f);
    finish(next);
    if (next.zone.is_empty()) return;
    TraceStep step;
    step.automaton = a;
    step.edge = e;
    if (b >= 0) {
      step.partner = b;
      step.partner_edge = f;
      step.channel = edge.sync.channel;
    }
    emit(std::move(next), step);
  });
}

bool ZoneGraph::has_deadlock(const SymbolicState& s) const {
  std::vector<Dbm> stuck{s.zone};
  const auto clocks = static_cast<std::size_t>(dim());
  transitions(s, [&](int a, int e, int b, int f) {
    if (stuck.empty()) return;
    // Valuations from which this transition fires now: guards, plus the
    // target invariants read through the resets.
    Dbm pre = s.zone;
    std::vector<bool> reset(clocks, false);
    std::vector<int> locs = s.locs;
    auto side = [&](int x, int y) {
      bool ok = true;
      for (const auto& c : net_.guard_of(x, y)) ok = ok && constrain(pre, c);
      const Automaton& aut = net_.automata[static_cast<std::size_t>(x)];
      const Edge& edge = aut.edges[static_cast<std::size_t>(y)];
      for (int c : edge.resets) reset[static_cast<std::size_t>(c)] = true;
      if (net_.resets_sojourn(x, y)) reset[static_cast<std::size_t>(aut.sojourn_clock)] = true;
      locs[static_cast<std::size_t>(x)] = edge.target;
      return ok;
    };
    if (!side(a, e) || (b >= 0 && !side(b, f))) return;
    for (std::size_t x = 0; x < locs.size(); ++x) {
      for (ClockConstraint c : net_.invariant_of(static_cast<int>(x), locs[x])) {
        if (reset[static_cast<std::size_t>(c.clock)]) c.clock = 0;
        if (reset[static_cast<std::size_t>(c.other)]) c.other = 0;
        if (c.clock == c.other) {
          // Both sides reset: the invariant reads 0 ~ bound.
          const std::int64_t k = c.bound;
          const bool holds = c.rel == Rel::Lt ? 0 < k : c.rel == Rel::Le ? 0 <= k : c.rel == Rel::Eq ? k == 0
                             : c.rel == Rel::Ge ? 0 >= k : 0 > k;
          if (!holds) return;
          continue;
        }
        if (!constrain(pre, c)) return;
      }
    }
    pre.down();
    std::vector<Dbm> rest;
    for (const Dbm& z : stuck)
      for (Dbm& piece : subtract(z, pre)) rest.push_back(std::move(piece));
    stuck = std::move(rest);
  });
  return !stuck.empty();
}

namespace {

std::optional<ClockConstraint> clock_atom(const Expr& cmp, ExprOp op) {
  const Expr* c = cmp.args[0].get();
  const Expr* k = cmp.args[1].get();
  if (c->op != ExprOp::Clock) {
    std::swap(c, k);
    op = flip_comparison(op);
  }
  if (c->op != ExprOp::Clock) return std::nullopt;
  const auto bound = fold_constant(*k);
  if (!bound) return std::nullopt;
  ClockConstraint cc;
  cc.clock = c->index;
  cc.bound = *bound;
  switch (op) {
    case ExprOp::Lt: cc.rel = Rel::Lt; break;
    case ExprOp::Le: cc.rel = Rel::Le; break;
    case ExprOp::Eq: cc.rel = Rel::Eq; break;
    case ExprOp::Ge: cc.rel = Rel::Ge; break;
    case ExprOp::Gt: cc.rel = Rel::Gt; break;
    default: return std::nullopt;
  }
  return cc;
}

class Satisfier {
public:
  explicit Satisfier(const EvalContext& ctx) : ctx_(ctx) {}

  std::vector<Dbm> run(const Expr& e, bool positive, std::vector<Dbm> in) const {
    if (in.empty()) return in;
    if (!has_clock(e)) {
      if (eval_bool(e, ctx_) == positive) return in;
      return {};
    }
    switch (e.op) {
      case ExprOp::Not: return run(*e.args[0], !positive, std::move(in));
      case ExprOp::And:
        return positive ? sequence(e, true, true, std::move(in)) : alternatives(e, false, false, in);
      case ExprOp::Or:
        return positive ? alternatives(e, true, true, in) : sequence(e, false, false, std::move(in));
      case ExprOp::Imply:
        return positive ? alternatives(e, false, true, in) : sequence(e, true, false, std::move(in));
      default: break;
    }
    if (is_comparison(e.op)) {
      const ExprOp op = positive ? e.op : negate_comparison(e.op);
      if (op == ExprOp::Ne) {
        auto lt = atom(e, ExprOp::Lt, in);
        auto gt = atom(e, ExprOp::Gt, in);
        lt.insert(lt.end(), gt.begin(), gt.end());
        return lt;
      }
      return atom(e, op, in);
    }
    throw EvalError("unsupported clock expression: " + render(e));
  }

private:
  std::vector<Dbm> sequence(const Expr& e, bool pa, bool pb, std::vector<Dbm> in) const {
    return run(*e.args[1], pb, run(*e.args[0], pa, std::move(in)));
  }
  std::vector<Dbm> alternatives(const Expr& e, bool pa, bool pb, const std::vector<Dbm>& in) const {
    auto left = run(*e.args[0], pa, in);
    auto right = run(*e.args[1], pb, in);
    left.insert(left.end(), right.begin(), right.end());
    return left;
  }
  std::vector<Dbm> atom(const Expr& cmp, ExprOp op, const std::vector<Dbm>& in) const {
    const auto cc = clock_atom(cmp, op);
    if (!cc) throw EvalError("query clock atoms must have the form 'clock ~ constant': " + render(cmp));
    std::vector<Dbm> out;
    for (Dbm z : in)
      if (constrain(z, *cc)) out.push_back(std::move(z));
    return out;
  }

  const EvalContext& ctx_;
};

}  // namespace

std::vector<Dbm> ZoneGraph::satisfying(const SymbolicState& s, const Expr& pred) const {
  const EvalContext ctx = context(s);
  return Satisfier(ctx).run(pred, true, {s.zone});
}

namespace {

std::string state_key(const SymbolicState& s) {
  std::string k(s.locs.size() * sizeof(int) + s.vars.size() * sizeof(std::int64_t), '\0');
  std::memcpy(k.data(), s.locs.data(), s.locs.size() * sizeof(int));
  std::memcpy(k.data() + s.locs.size() * sizeof(int), s.vars.data(), s.vars.size() * sizeof(std::int64_t));
  return k;
}

std::uint64_t kib(std::uint64_t states, std::size_t footprint) { return (states * footprint + 1023) / 1024; }

/// Shared bookkeeping: state count, memory estimate, caps.
class Budget {
public:
  Budget(const ZoneEngineOptions& opt, std::size_t footprint) : opt_(opt), footprint_(footprint) {}

  /// Charges one stored state; false (with `limit` set) when a cap is hit.
  bool charge() {
    if (opt_.caps.max_states && states_ >= opt_.caps.max_states) {
      limit = "max-states=" + std::to_string(opt_.caps.max_states);
      return false;
    }
    if (opt_.caps.max_mem_kib && kib(resident_ + 1, footprint_) > opt_.caps.max_mem_kib) {
      limit = "max-mem-kib=" + std::to_string(opt_.caps.max_mem_kib);
      return false;
    }
    ++states_;
    ++resident_;
    peak_ = std::max(peak_, resident_);
    return true;
  }
  void release(std::uint64_t n) { resident_ -= std::min(n, resident_); }

  PerfTriple stats(const CpuTimer& t) const { return {states_, t.elapsed_ms(), kib(peak_, footprint_)}; }

  std::string limit;

private:
  const ZoneEngineOptions& opt_;
  std::size_t footprint_;
  std::uint64_t states_ = 0;
  std::uint64_t resident_ = 0;
  std::uint64_t peak_ = 0;
};

struct Node {
  SymbolicState s;
  int parent = -1;
  TraceStep step;
};

/// Forward exploration with a passed list keyed by (locations, valuation).
class Reachability {
public:
  Reachability(const ZoneGraph& g, const ZoneEngineOptions& opt, Budget& budget)
      : g_(g), opt_(opt), budget_(budget) {}

  /// Stores a state unless a passed state covers it. Returns its index, -1
  /// when covered, -2 when a cap was hit.
  int add(SymbolicState&& s, int parent, const TraceStep& step) {
    auto& bucket = passed_[state_key(s)];
    for (int i : bucket) {
      const Dbm& z = nodes_[static_cast<std::size_t>(i)].s.zone;
      if (opt_.subsumption ? z.includes(s.zone) : z == s.zone) return -1;
    }
    if (!budget_.charge()) return -2;
    nodes_.push_back({std::move(s), parent, step});
    const int idx = static_cast<int>(nodes_.size()) - 1;
    bucket.push_back(idx);
    return idx;
  }

  enum class Outcome { Found, Exhausted, Limit };

  /// Visits states in search order. `accept(idx)` returning true stops the
  /// search at that state; `on_expanded(idx, successor_count)` likewise.
  template <class Accept, class Expanded>
  Outcome run(Accept&& accept, Expanded&& on_expanded) {
    SymbolicState init = g_.initial();
    if (init.zone.is_empty()) return Outcome::Exhausted;
    const int root = add(std::move(init), -1, {});
    if (root == -2) return Outcome::Limit;
    if (accept(root)) {
      found = root;
      return Outcome::Found;
    }
    std::deque<int> waiting{root};
    while (!waiting.empty()) {
      int cur;
      if (opt_.order == SearchOrder::Bfs) {
        cur = waiting.front();
        waiting.pop_front();
      } else {
        cur = waiting.back();
        waiting.pop_back();
      }
      std::size_t count = 0;
      bool limit = false;
      int hit = -1;
      const SymbolicState here = nodes_[static_cast<std::size_t>(cur)].s;
      g_.successors(here, [&](SymbolicState&& next, const TraceStep& step) {
        ++count;
        if (limit || hit >= 0) return;
        const int idx = add(std::move(next), cur, step);
        if (idx == -2) {
          limit = true;
        } else if (idx >= 0) {
          if (accept(idx)) hit = idx;
          else waiting.push_back(idx);
        }
      });
      if (hit >= 0) {
        found = hit;
        return Outcome::Found;
      }
      if (limit) return Outcome::Limit;
      if (on_expanded(cur, count)) {
        found = cur;
        return Outcome::Found;
      }
    }
    return Outcome::Exhausted;
  }

  const SymbolicState& state(int idx) const { return nodes_[static_cast<std::size_t>(idx)].s; }

  Witness path_to(int idx) const {
    std::vector<int> chain;
    for (int i = idx; i >= 0; i = nodes_[static_cast<std::size_t>(i)].parent) chain.push_back(i);
    std::reverse(chain.begin(), chain.end());
    Witness w;
    for (std::size_t k = 0; k < chain.size(); ++k) {
      const Node& n = nodes_[static_cast<std::size_t>(chain[k])];
      w.states.push_back(n.s);
      if (k > 0) w.steps.push_back(n.step);
    }
    return w;
  }

  int found = -1;

private:
  const ZoneGraph& g_;
  const ZoneEngineOptions& opt_;
  Budget& budget_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::vector<int>> passed_;
};

CmcVerdict limited(const Budget& budget, const CpuTimer& timer) {
  CmcVerdict v;
  v.result = CmcResult::ResourceLimit;
  v.limit = budget.limit;
  v.stats = budget.stats(timer);
  return v;
}

/// Nested DFS for A<> psi from a given state: fails on a reachable
/// non-psi state holding deadlocked valuations or on a non-psi cycle. States proven to
/// reach psi are remembered across calls.
class Liveness {
public:
  Liveness(const ZoneGraph& g, const Expr& psi, Budget& budget) : g_(g), psi_(psi), budget_(budget) {}

  enum class Outcome { Holds, Violated, Limit };

  Outcome check(const SymbolicState& start) {
    counterexample.clear();
    if (holds_psi(start) || proven_covers(start)) return Outcome::Holds;
    if (!push(start, {})) return Outcome::Limit;
    if (g_.has_deadlock(stack_.back().s)) return violated(std::nullopt);
    while (!stack_.empty()) {
      Frame& f = stack_.back();
      if (f.next == f.succs.size()) {
        const std::string key = state_key(f.s);
        auto& on_stack = stack_keys_[key];
        on_stack.pop_back();
        proven_[key].push_back(f.s.zone);
        stack_.pop_back();
        continue;
      }
      auto& [succ, step] = f.succs[f.next++];
      if (holds_psi(succ) || proven_covers(succ)) continue;
      if (stack_covers(succ)) return violated(std::make_pair(succ, step));
      SymbolicState copy = succ;
      const TraceStep s = step;
      if (!push(std::move(copy), s)) return Outcome::Limit;
      if (g_.has_deadlock(stack_.back().s)) return violated(std::nullopt);
    }
    return Outcome::Holds;
  }

  /// States (with incoming steps) from the start to the violation.
  std::vector<std::pair<SymbolicState, TraceStep>> counterexample;

private:
  struct Frame {
    SymbolicState s;
    TraceStep in;
    std::vector<std::pair<SymbolicState, TraceStep>> succs;
    std::size_t next = 0;
  };

  bool holds_psi(const SymbolicState& s) const {
    EvalContext ctx;
    ctx.locations = s.locs;
    ctx.vars = s.vars;
    return eval_bool(psi_, ctx);
  }
  bool proven_covers(const SymbolicState& s) const {
    auto it = proven_.find(state_key(s));
    if (it == proven_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [&](const Dbm& z) { return z.includes(s.zone); });
  }
  bool stack_covers(const SymbolicState& s) const {
    auto it = stack_keys_.find(state_key(s));
    if (it == stack_keys_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [&](std::size_t i) {
      return stack_[i].s.zone.includes(s.zone);
    });
  }
  bool push(SymbolicState s, const TraceStep& in) {
    if (!budget_.charge()) return false;
    Frame f{std::move(s), in, {}, 0};
    g_.successors(f.s, [&](SymbolicState&& next, const TraceStep& step) { f.succs.emplace_back(std::move(next), step); });
    stack_keys_[state_key(f.s)].push_back(stack_.size());
    stack_.push_back(std::move(f));
    return true;
  }
  Outcome violated(std::optional<std::pair<SymbolicState, TraceStep>> closing) {
    for (const auto& f : stack_) counterexample.emplace_back(f.s, f.in);
    if (closing) counterexample.push_back(std::move(*closing));
    stack_.clear();
    stack_keys_.clear();
    return Outcome::Violated;
  }

  const ZoneGraph& g_;
  const Expr& psi_;
  Budget& budget_;
  std::vector<Frame> stack_;
  std::unordered_map<std::string, std::vector<std::size_t>> stack_keys_;
  std::unordered_map<std::string, std::vector<Dbm>> proven_;
};

CmcVerdict reach(const ZoneGraph& g, const ZoneEngineOptions& opt, const ExprPtr& target, bool satisfied_if_found) {
  CpuTimer timer;
  Budget budget(opt, g.footprint());
  Reachability r(g, opt, budget);
  const auto outcome = r.run([&](int idx) { return g.intersects(r.state(idx), *target); },
                             [](int, std::size_t) { return false; });
  if (outcome == Reachability::Outcome::Limit) return limited(budget, timer);
  CmcVerdict v;
  const bool found = outcome == Reachability::Outcome::Found;
  v.result = found == satisfied_if_found ? CmcResult::Satisfied : CmcResult::NotSatisfied;
  if (found) {
    v.witness = r.path_to(r.found);
    annotate_delays(g.network(), *v.witness);
  }
  v.stats = budget.stats(timer);
  return v;
}

CmcVerdict deadlock_free(const ZoneGraph& g, const ZoneEngineOptions& opt) {
  CpuTimer timer;
  Budget budget(opt, g.footprint());
  Reachability r(g, opt, budget);
  const auto outcome = r.run([](int) { return false; }, [&](int idx, std::size_t) { return g.has_deadlock(r.state(idx)); });
  if (outcome == Reachability::Outcome::Limit) return limited(budget, timer);
  CmcVerdict v;
  if (outcome == Reachability::Outcome::Found) {
    v.result = CmcResult::NotSatisfied;
    v.witness = r.path_to(r.found);
    annotate_delays(g.network(), *v.witness);
  }
  v.stats = budget.stats(timer);
  return v;
}

Witness join(Witness prefix, const std::vector<std::pair<SymbolicState, TraceStep>>& tail) {
  for (std::size_t i = 1; i < tail.size(); ++i) {
    prefix.states.push_back(tail[i].first);
    prefix.steps.push_back(tail[i].second);
  }
  return prefix;
}

CmcVerdict always_eventually(const ZoneGraph& g, const ZoneEngineOptions& opt, const Expr& psi) {
  CpuTimer timer;
  Budget budget(opt, g.footprint());
  Liveness live(g, psi, budget);
  const SymbolicState init = g.initial();
  CmcVerdict v;
  switch (live.check(init)) {
    case Liveness::Outcome::Limit: return limited(budget, timer);
    case Liveness::Outcome::Holds: break;
    case Liveness::Outcome::Violated: {
      v.result = CmcResult::NotSatisfied;
      Witness w;
      w.states.push_back(live.counterexample.front().first);
      v.witness = join(std::move(w), live.counterexample);
      annotate_delays(g.network(), *v.witness);
      break;
    }
  }
  v.stats = budget.stats(timer);
  return v;
}

CmcVerdict leads_to(const ZoneGraph& g, const ZoneEngineOptions& opt, const Expr& phi, const Expr& psi) {
  CpuTimer timer;
  Budget budget(opt, g.footprint());
  Reachability r(g, opt, budget);
  Liveness live(g, psi, budget);
  bool limit = false;
  const auto outcome = r.run(
      [&](int idx) {
        const SymbolicState& s = r.state(idx);
        EvalContext ctx;
        ctx.locations = s.locs;
        ctx.vars = s.vars;
        if (!eval_bool(phi, ctx)) return false;
        const auto o = live.check(s);
        if (o == Liveness::Outcome::Limit) limit = true;
        return o != Liveness::Outcome::Holds;
      },
      [](int, std::size_t) { return false; });
  if (limit || outcome == Reachability::Outcome::Limit) return limited(budget, timer);
  CmcVerdict v;
  if (outcome == Reachability::Outcome::Found) {
    v.result = CmcResult::NotSatisfied;
    v.witness = join(r.path_to(r.found), live.counterexample);
    annotate_delays(g.network(), *v.witness);
  }
  v.stats = budget.stats(timer);
  return v;
}

}  // namespace

CmcVerdict explore(const Network& net, const ExprPtr& target, const ZoneEngineOptions& opt) {
  std::vector<std::int64_t> extra(static_cast<std::size_t>(net.clock_count()) + 1, 0);
  for_each_clock_comparison(*target, [&](const Expr& cmp) {
    for (const auto& side : cmp.args)
      if (side->op == ExprOp::Clock)
        for (const auto& k : cmp.args)
          if (auto v = fold_constant(*k)) {
            auto& slot = extra[static_cast<std::size_t>(side->index)];
            slot = std::max(slot, *v < 0 ? -*v : *v);
          }
  });
  const ZoneGraph g(net, extra);
  return reach(g, opt, target, true);
}

CmcVerdict check_query(const Network& net, const BoundQuery& q, const ZoneEngineOptions& opt) {
  require_engine(q, Engine::Classical);
  const ZoneGraph g(net, query_max_constants(q, net));
  const QueryAst& a = q.ast;
  switch (a.kind) {
    case QueryKind::ExistsEventually: return reach(g, opt, a.p, true);
    case QueryKind::AlwaysGlobally: return reach(g, opt, make_unary(ExprOp::Not, a.p, a.p->pos), false);
    case QueryKind::AlwaysEventually: return always_eventually(g, opt, *a.p);
    case QueryKind::LeadsTo: return leads_to(g, opt, *a.p, *a.q);
    case QueryKind::DeadlockFree: return deadlock_free(g, opt);
    default: break;
  }
  throw ParseError({{"ENGINE_MISMATCH", "not a classical query", a.pos, render_query(a)}});
}

void annotate_delays(const Network& net, Witness& w) {
  const int dim = net.clock_count() + 2;
  const int delta = dim - 1;
  Dbm z = Dbm::zero(dim);
  auto invariants = [&](const std::vector<int>& locs) {
    for (std::size_t a = 0; a < locs.size(); ++a)
      for (const auto& c : net.invariant_of(static_cast<int>(a), locs[a]))
        if (!constrain(z, c)) return false;
    return true;
  };
  auto settle = [&](const std::vector<int>& locs) {
    if (!invariants(locs)) return false;
    z.up();
    return invariants(locs);
  };
  if (w.states.empty() || !settle(w.states.front().locs)) return;
  for (std::size_t i = 0; i < w.steps.size(); ++i) {
    TraceStep& st = w.steps[i];
    for (const auto& c : net.guard_of(st.automaton, st.edge)) constrain(z, c);
    if (st.partner >= 0)
      for (const auto& c : net.guard_of(st.partner, st.partner_edge)) constrain(z, c);
    if (z.is_empty()) return;
    const Bound lo = z.at(0, delta);
    const Bound hi = z.at(delta, 0);
    st.delay_lo = -lo.value();
    st.delay_lo_strict = lo.strict();
    st.delay_hi = hi.is_inf() ? -1 : hi.value();
    st.delay_hi_strict = !hi.is_inf() && hi.strict();
    auto apply = [&](int a, int e) {
      const Automaton& aut = net.automata[static_cast<std::size_t>(a)];
      for (int c : aut.edges[static_cast<std::size_t>(e)].resets) z.reset(c);
      if (net.resets_sojourn(a, e)) z.reset(aut.sojourn_clock);
    };
    apply(st.automaton, st.edge);
    if (st.partner >= 0) apply(st.partner, st.partner_edge);
    z.reset(delta);
    if (!settle(w.states[i + 1].locs)) return;
  }
}

namespace {

std::string edge_label(const Network& net, int a, int e) {
  const Automaton& aut = net.automata[static_cast<std::size_t>(a)];
  const Edge& edge = aut.edges[static_cast<std::size_t>(e)];
  return aut.locations[static_cast<std::size_t>(edge.source)].name + "->" +
         aut.locations[static_cast<std::size_t>(edge.target)].name;
}

}  // namespace

std::string witness_csv(const Network& net, const Witness& w) {
  std::ostringstream os;
  os << "step,delay_lo,delay_hi,automaton,edge,channel\n";
  for (std::size_t i = 0; i < w.steps.size(); ++i) {
    const TraceStep& st = w.steps[i];
    os << i + 1 << ',' << (st.delay_lo_strict ? ">" : "") << st.delay_lo << ',';
    if (st.delay_hi < 0) os << "inf";
    else os << (st.delay_hi_strict ? "<" : "") << st.delay_hi;
    os << ',' << net.automata[static_cast<std::size_t>(st.automaton)].name;
    if (st.partner >= 0) os << '+' << net.automata[static_cast<std::size_t>(st.partner)].name;
    os << ',' << edge_label(net, st.automaton, st.edge);
    if (st.partner >= 0) os << '+' << edge_label(net, st.partner, st.partner_edge);
    os << ',' << (st.channel >= 0 ? net.channels[static_cast<std::size_t>(st.channel)] : "") << '\n';
  }
  return os.str();
}

std::string describe_state(const Network& net, const SymbolicState& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t a = 0; a < s.locs.size(); ++a) {
    const Automaton& aut = net.automata[a];
    os << (a ? ", " : "") << aut.name << '.' << aut.locations[static_cast<std::size_t>(s.locs[a])].name;
  }
  os << ')';
  for (std::size_t v = 0; v < s.vars.size(); ++v) os << ' ' << net.variables[v].name << '=' << s.vars[v];
  return os.str();
}

}  // namespace twinverify
