#pragma once

// Random closed-constraint networks and a brute-force integer-clock
// reachability oracle. For closed constraints with integer constants the
// integer-time valuations reach exactly the location/variable pairs the
// dense-time semantics reaches, so E<> verdicts must agree.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <set>
#include <string>
#include <vector>

#include "twinverify/expr.hpp"
#include "twinverify/model.hpp"
#include "twinverify/rng.hpp"

namespace twinverify::testing {

struct OracleTarget {
  int automaton = 0;
  int location = 0;
  int clock_lower = -1;  // additionally require the automaton's sojourn clock >= this, when >= 0

  std::string query(const Network& net) const {
    const auto& a = net.automata[static_cast<std::size_t>(automaton)];
    std::string q = "E<> " + a.name + "." + a.locations[static_cast<std::size_t>(location)].name;
    if (clock_lower >= 0) q = "E<> (" + q.substr(4) + " and " + a.name + ".t >= " + std::to_string(clock_lower) + ")";
    return q;
  }
};

struct RandomNet {
  std::string text;
  OracleTarget target;
};

inline std::string closed_atom(Rng& rng, const std::string& clock, int max_c, bool upper_only) {
  static const char* rels[] = {"<=", ">=", "=="};
  const char* rel = upper_only ? "<=" : rels[rng.index(3)];
  return clock + " " + rel + " " + std::to_string(rng.index(static_cast<std::uint64_t>(max_c) + 1));
}

/// <= 2 automata, <= 4 locations each, closed constraints, constants <= max_c.
inline RandomNet random_closed_net(Rng& rng, int max_c = 4) {
  RandomNet out;
  const bool global = rng.bernoulli(0.5);
  const bool var = rng.bernoulli(0.5);
  const int n_aut = 1 + static_cast<int>(rng.index(2));
  std::string& s = out.text;
  if (global) s += "clock g\n";
  if (var) s += "int v[0,1] = 0\n";
  s += "chan c0, c1\n";
  std::vector<int> n_locs;
  for (int a = 0; a < n_aut; ++a) {
    const int nl = 1 + static_cast<int>(rng.index(4));
    n_locs.push_back(nl);
    s += "process P" + std::to_string(a) + " {\n";
    for (int l = 0; l < nl; ++l) {
      s += "  loc L" + std::to_string(l);
      if (l == 0) s += " init";
      if (rng.bernoulli(0.3)) s += " inv " + closed_atom(rng, global && rng.bernoulli(0.5) ? "g" : "t", max_c, true);
      if (rng.bernoulli(0.2)) s += " delay fixed " + std::to_string(rng.index(static_cast<std::uint64_t>(max_c) + 1));
      s += "\n";
    }
    const int ne = 1 + static_cast<int>(rng.index(6));
    for (int e = 0; e < ne; ++e) {
      s += "  edge L" + std::to_string(rng.index(static_cast<std::uint64_t>(nl))) + " -> L" +
           std::to_string(rng.index(static_cast<std::uint64_t>(nl)));
      std::vector<std::string> guard;
      const auto n_atoms = rng.index(3);
      for (std::uint64_t k = 0; k < n_atoms; ++k)
        guard.push_back(closed_atom(rng, global && rng.bernoulli(0.4) ? "g" : "t", max_c, false));
      if (var && rng.bernoulli(0.3)) guard.push_back("v == " + std::to_string(rng.index(2)));
      if (!guard.empty()) {
        s += " guard " + guard[0];
        for (std::size_t k = 1; k < guard.size(); ++k) s += " and " + guard[k];
      }
      const double u = rng.uniform01();
      if (n_aut > 1 && u < 0.2) s += " sync c" + std::to_string(rng.index(2)) + "!";
      else if (n_aut > 1 && u < 0.4) s += " sync c" + std::to_string(rng.index(2)) + "?";
      std::vector<std::string> resets;
      if (rng.bernoulli(0.3)) resets.push_back("t");
      if (global && rng.bernoulli(0.2)) resets.push_back("g");
      if (!resets.empty()) {
        s += " reset " + resets[0];
        for (std::size_t k = 1; k < resets.size(); ++k) s += ", " + resets[k];
      }
      if (var && rng.bernoulli(0.2)) s += " update v = " + std::to_string(rng.index(2));
      s += "\n";
    }
    s += "}\n";
  }
  out.target.automaton = static_cast<int>(rng.index(static_cast<std::uint64_t>(n_aut)));
  out.target.location = static_cast<int>(rng.index(static_cast<std::uint64_t>(n_locs[static_cast<std::size_t>(out.target.automaton)])));
  if (rng.bernoulli(0.3)) out.target.clock_lower = static_cast<int>(rng.index(static_cast<std::uint64_t>(max_c) + 1));
  return out;
}

class DiscreteOracle {
public:
  explicit DiscreteOracle(const Network& net) : net_(net) {
    std::int64_t m = 0;
    auto see = [&](const std::vector<ClockConstraint>& cs) {
      for (const auto& c : cs) m = std::max(m, c.bound < 0 ? -c.bound : c.bound);
    };
    for (std::size_t a = 0; a < net.automata.size(); ++a) {
      for (std::size_t l = 0; l < net.automata[a].locations.size(); ++l)
        see(net.invariant_of(static_cast<int>(a), static_cast<int>(l)));
      for (std::size_t e = 0; e < net.automata[a].edges.size(); ++e)
        see(net.guard_of(static_cast<int>(a), static_cast<int>(e)));
    }
    cap_ = m + 1;
  }

  bool reachable(const OracleTarget& t) {
    cap_ = std::max<std::int64_t>(cap_, t.clock_lower + 1);
    State init;
    for (const auto& a : net_.automata) init.locs.push_back(a.initial);
    for (const auto& v : net_.variables) init.vars.push_back(v.init);
    init.clocks.assign(static_cast<std::size_t>(net_.clock_count()) + 1, 0);
    if (!invariants_hold(init)) return false;
    std::set<State> seen{init};
    std::deque<State> todo{init};
    while (!todo.empty()) {
      State s = todo.front();
      todo.pop_front();
      if (hits(s, t)) return true;
      for (auto& n : successors(s))
        if (seen.insert(n).second) todo.push_back(std::move(n));
    }
    return false;
  }

private:
  struct State {
    std::vector<int> locs;
    std::vector<std::int64_t> vars;
    std::vector<std::int64_t> clocks;  // slot 0 is the reference clock, capped at cap_
    auto operator<=>(const State&) const = default;
  };

  bool holds(const ClockConstraint& c, const State& s) const {
    const std::int64_t d = s.clocks[static_cast<std::size_t>(c.clock)] - s.clocks[static_cast<std::size_t>(c.other)];
    switch (c.rel) {
      case Rel::Lt: return d < c.bound;
      case Rel::Le: return d <= c.bound;
      case Rel::Eq: return d == c.bound;
      case Rel::Ge: return d >= c.bound;
      case Rel::Gt: return d > c.bound;
    }
    return false;
  }

  bool all(const std::vector<ClockConstraint>& cs, const State& s) const {
    return std::all_of(cs.begin(), cs.end(), [&](const ClockConstraint& c) { return holds(c, s); });
  }

  bool invariants_hold(const State& s) const {
    for (std::size_t a = 0; a < s.locs.size(); ++a)
      if (!all(net_.invariant_of(static_cast<int>(a), s.locs[a]), s)) return false;
    return true;
  }

  std::vector<double> real_clocks(const State& s) const { return {s.clocks.begin(), s.clocks.end()}; }

  bool enabled(int a, int e, const State& s) const {
    const Edge& edge = net_.automata[static_cast<std::size_t>(a)].edges[static_cast<std::size_t>(e)];
    if (edge.source != s.locs[static_cast<std::size_t>(a)]) return false;
    if (!all(net_.guard_of(a, e), s)) return false;
    const auto clocks = real_clocks(s);
    EvalContext ctx{s.locs, s.vars, clocks};
    return std::all_of(edge.data_guard.begin(), edge.data_guard.end(),
                       [&](const ExprPtr& g) { return eval_bool(*g, ctx); });
  }

  void fire(int a, int e, const State& pre, State& post) const {
    const Edge& edge = net_.automata[static_cast<std::size_t>(a)].edges[static_cast<std::size_t>(e)];
    const auto clocks = real_clocks(pre);
    EvalContext ctx{pre.locs, post.vars, clocks};
    std::vector<std::int64_t> vals;
    for (const auto& u : edge.updates) vals.push_back(eval_int(*u.value, ctx));
    for (std::size_t k = 0; k < vals.size(); ++k) post.vars[static_cast<std::size_t>(edge.updates[k].var)] = vals[k];
    for (int c : edge.resets) post.clocks[static_cast<std::size_t>(c)] = 0;
    if (net_.resets_sojourn(a, e))
      post.clocks[static_cast<std::size_t>(net_.automata[static_cast<std::size_t>(a)].sojourn_clock)] = 0;
    post.locs[static_cast<std::size_t>(a)] = edge.target;
  }

  bool in_domain(const State& s) const {
    for (std::size_t v = 0; v < s.vars.size(); ++v)
      if (s.vars[v] < net_.variables[v].min || s.vars[v] > net_.variables[v].max) return false;
    return true;
  }

  std::vector<State> successors(const State& s) const {
    std::vector<State> out;
    State d = s;
    for (std::size_t c = 1; c < d.clocks.size(); ++c) d.clocks[c] = std::min(d.clocks[c] + 1, cap_);
    if (invariants_hold(d)) out.push_back(d);
    const int n = static_cast<int>(net_.automata.size());
    for (int a = 0; a < n; ++a) {
      const auto& edges = net_.automata[static_cast<std::size_t>(a)].edges;
      for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
        const Edge& edge = edges[static_cast<std::size_t>(e)];
        if (!edge.is_active() || !enabled(a, e, s)) continue;
        if (edge.sync.kind == SyncKind::Internal) {
          State post = s;
          fire(a, e, s, post);
          if (in_domain(post) && invariants_hold(post)) out.push_back(std::move(post));
          continue;
        }
        for (int b = 0; b < n; ++b) {
          if (b == a) continue;
          const auto& redges = net_.automata[static_cast<std::size_t>(b)].edges;
          for (int r = 0; r < static_cast<int>(redges.size()); ++r) {
            const Edge& re = redges[static_cast<std::size_t>(r)];
            if (re.sync.kind != SyncKind::Receive || re.sync.channel != edge.sync.channel || !enabled(b, r, s)) continue;
            State post = s;
            fire(a, e, s, post);
            fire(b, r, s, post);
            if (in_domain(post) && invariants_hold(post)) out.push_back(std::move(post));
          }
        }
      }
    }
    return out;
  }

  bool hits(const State& s, const OracleTarget& t) const {
    if (s.locs[static_cast<std::size_t>(t.automaton)] != t.location) return false;
    if (t.clock_lower < 0) return true;
    const int c = net_.automata[static_cast<std::size_t>(t.automaton)].sojourn_clock;
    return s.clocks[static_cast<std::size_t>(c)] >= t.clock_lower;
  }

  const Network& net_;
  std::int64_t cap_ = 1;
};

}  // namespace twinverify::testing
