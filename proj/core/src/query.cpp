#include "twinverify/query.hpp"

#include <algorithm>
#include <sstream>

namespace twinverify {

Engine engine_of(QueryKind kind) {
  switch (kind) {
    case QueryKind::ExistsEventually:
    case QueryKind::AlwaysGlobally:
    case QueryKind::AlwaysEventually:
    case QueryKind::LeadsTo:
    case QueryKind::DeadlockFree:
      return Engine::Classical;
    default:
      return Engine::Statistical;
  }
}

const char* to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::ExistsEventually: return "exists-eventually";
    case QueryKind::AlwaysGlobally: return "always-globally";
    case QueryKind::AlwaysEventually: return "always-eventually";
    case QueryKind::LeadsTo: return "leads-to";
    case QueryKind::DeadlockFree: return "deadlock-free";
    case QueryKind::ProbEstimate: return "probability-estimate";
    case QueryKind::ProbTest: return "hypothesis-test";
    case QueryKind::ProbCompare: return "probability-compare";
    case QueryKind::ValueEstimate: return "value-estimate";
    case QueryKind::Simulate: return "simulate";
  }
  return "?";
}

const char* to_string(Engine e) { return e == Engine::Classical ? "cmc" : "smc"; }

namespace {

[[noreturn]] void fail_at(SourcePos pos, const std::string& code, const std::string& msg) {
  throw ParseError({{code, msg, pos, ""}});
}

std::int64_t time_bound(TokenStream& ts) {
  ts.expect("[");
  ts.expect("<=");
  const Token& t = ts.peek();
  if (t.is("-")) fail_at(t.pos, "BAD_BOUND", "time bound must be positive");
  const Token& n = ts.expect_kind(TokenKind::Int, "time bound");
  const std::int64_t v = std::stoll(n.text);
  if (v <= 0) fail_at(n.pos, "BAD_BOUND", "time bound must be positive");
  return v;
}

Monitor monitor(TokenStream& ts, std::int64_t bound) {
  Monitor m;
  m.bound = bound;
  ts.expect("(");
  if (ts.accept("<>")) {
    m.shape = MonitorShape::EventuallyWithin;
  } else if (ts.peek().is("[") && ts.peek(1).is("]")) {
    ts.next();
    ts.next();
    m.shape = MonitorShape::GloballyWithin;
  } else {
    ts.fail(ts.peek(), "'<>' or '[]'");
  }
  m.predicate = parse_expr(ts);
  ts.expect(")");
  return m;
}

Monitor prob_monitor(TokenStream& ts) {
  const std::int64_t b = time_bound(ts);
  ts.expect("]");
  return monitor(ts, b);
}

double probability(TokenStream& ts) {
  const Token& t = ts.peek();
  if (t.kind != TokenKind::Int && t.kind != TokenKind::Real) ts.fail(t, "probability threshold");
  ts.next();
  const double v = std::stod(t.text);
  if (!(v >= 0.0 && v <= 1.0)) fail_at(t.pos, "BAD_THRESHOLD", "probability threshold must lie in [0,1]");
  return v;
}

std::int64_t positive_count(TokenStream& ts, std::int64_t min, const char* what) {
  const Token& n = ts.expect_kind(TokenKind::Int, what);
  const std::int64_t v = std::stoll(n.text);
  if (v < min) fail_at(n.pos, "BAD_RUNS", std::string(what) + " must be at least " + std::to_string(min));
  return v;
}

bool is_deadlock_negation(const ExprPtr& e) {
  return e->op == ExprOp::Not && e->args[0]->op == ExprOp::Name && e->args[0]->qualifier.empty() &&
         e->args[0]->name == "deadlock";
}

QueryAst parse_one(TokenStream& ts) {
  QueryAst q;
  ts.skip_newlines();
  q.pos = ts.peek().pos;
  const Token& t = ts.peek();
  if (t.is_ident("E") && ts.peek(1).is("<>")) {
    ts.next();
    ts.next();
    q.kind = QueryKind::ExistsEventually;
    q.p = parse_expr(ts);
  } else if (t.is_ident("E") && ts.peek(1).is("[")) {
    ts.next();
    q.kind = QueryKind::ValueEstimate;
    q.time_bound = time_bound(ts);
    ts.expect(";");
    q.runs = positive_count(ts, 2, "run count");
    ts.expect("]");
    ts.expect("(");
    if (ts.accept_ident("max")) q.reduce = Reduce::Max;
    else if (ts.accept_ident("min")) q.reduce = Reduce::Min;
    else ts.fail(ts.peek(), "'max' or 'min'");
    ts.expect(":");
    q.value = parse_expr(ts);
    ts.expect(")");
  } else if (t.is_ident("A") && ts.peek(1).is("[") && ts.peek(2).is("]")) {
    ts.next();
    ts.next();
    ts.next();
    q.p = parse_expr(ts);
    q.kind = is_deadlock_negation(q.p) ? QueryKind::DeadlockFree : QueryKind::AlwaysGlobally;
    if (q.kind == QueryKind::DeadlockFree) q.p = nullptr;
  } else if (t.is_ident("A") && ts.peek(1).is("<>")) {
    ts.next();
    ts.next();
    q.kind = QueryKind::AlwaysEventually;
    q.p = parse_expr(ts);
  } else if (t.is_ident("Pr") && ts.peek(1).is("[")) {
    ts.next();
    q.m1 = prob_monitor(ts);
    q.kind = QueryKind::ProbEstimate;
    const Token& cmp = ts.peek();
    if (cmp.is(">=") || cmp.is("<=")) {
      ts.next();
      if (ts.peek().is_ident("Pr")) {
        if (cmp.is("<=")) fail_at(cmp.pos, "SYNTAX", "probability comparison must use '>='");
        ts.next();
        q.kind = QueryKind::ProbCompare;
        q.m2 = prob_monitor(ts);
        if (q.m2.bound != q.m1.bound)
          fail_at(cmp.pos, "BAD_BOUND", "compared monitors must share a time bound");
      } else {
        q.kind = QueryKind::ProbTest;
        q.direction = cmp.is(">=") ? Direction::AtLeast : Direction::AtMost;
        q.threshold = probability(ts);
      }
    }
  } else if (t.is_ident("simulate")) {
    ts.next();
    q.kind = QueryKind::Simulate;
    q.runs = positive_count(ts, 1, "run count");
    q.time_bound = time_bound(ts);
    ts.expect("]");
    ts.expect("{");
    do {
      q.exprs.push_back(parse_expr(ts));
    } while (ts.accept(","));
    ts.expect("}");
  } else {
    q.kind = QueryKind::LeadsTo;
    q.p = parse_expr(ts);
    ts.expect("-->");
    q.q = parse_expr(ts);
  }
  ts.skip_newlines();
  if (!ts.at_end()) ts.fail(ts.peek(), "end of query");
  return q;
}

std::string fmt_threshold(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  std::string s = os.str();
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string render_monitor(const Monitor& m) {
  return "Pr[<=" + std::to_string(m.bound) + "](" +
         (m.shape == MonitorShape::EventuallyWithin ? "<> " : "[] ") + render(m.predicate) + ")";
}

bool same_monitor(const Monitor& a, const Monitor& b) {
  return a.shape == b.shape && a.bound == b.bound && same(a.predicate, b.predicate);
}

}  // namespace

QueryAst parse_query(std::string_view text) {
  TokenStream ts(tokenize(text));
  return parse_one(ts);
}

std::string render_query(const QueryAst& q) {
  switch (q.kind) {
    case QueryKind::ExistsEventually: return "E<> " + render(q.p);
    case QueryKind::AlwaysGlobally: return "A[] " + render(q.p);
    case QueryKind::AlwaysEventually: return "A<> " + render(q.p);
    case QueryKind::LeadsTo: return render(q.p) + " --> " + render(q.q);
    case QueryKind::DeadlockFree: return "A[] not deadlock";
    case QueryKind::ProbEstimate: return render_monitor(q.m1);
    case QueryKind::ProbTest:
      return render_monitor(q.m1) + (q.direction == Direction::AtMost ? " <= " : " >= ") +
             fmt_threshold(q.threshold);
    case QueryKind::ProbCompare: return render_monitor(q.m1) + " >= " + render_monitor(q.m2);
    case QueryKind::ValueEstimate:
      return "E[<=" + std::to_string(q.time_bound) + "; " + std::to_string(q.runs) + "](" +
             (q.reduce == Reduce::Max ? "max" : "min") + ": " + render(q.value) + ")";
    case QueryKind::Simulate: {
      std::string s = "simulate " + std::to_string(q.runs) + " [<=" + std::to_string(q.time_bound) + "] {";
      for (std::size_t i = 0; i < q.exprs.size(); ++i) s += (i ? ", " : "") + render(q.exprs[i]);
      return s + "}";
    }
  }
  return {};
}

bool same_query(const QueryAst& a, const QueryAst& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case QueryKind::ExistsEventually:
    case QueryKind::AlwaysGlobally:
    case QueryKind::AlwaysEventually:
      return same(a.p, b.p);
    case QueryKind::LeadsTo: return same(a.p, b.p) && same(a.q, b.q);
    case QueryKind::DeadlockFree: return true;
    case QueryKind::ProbEstimate: return same_monitor(a.m1, b.m1);
    case QueryKind::ProbTest:
      return same_monitor(a.m1, b.m1) && a.direction == b.direction && a.threshold == b.threshold;
    case QueryKind::ProbCompare: return same_monitor(a.m1, b.m1) && same_monitor(a.m2, b.m2);
    case QueryKind::ValueEstimate:
      return a.time_bound == b.time_bound && a.runs == b.runs && a.reduce == b.reduce && same(a.value, b.value);
    case QueryKind::Simulate: {
      if (a.time_bound != b.time_bound || a.runs != b.runs || a.exprs.size() != b.exprs.size()) return false;
      for (std::size_t i = 0; i < a.exprs.size(); ++i)
        if (!same(a.exprs[i], b.exprs[i])) return false;
      return true;
    }
  }
  return false;
}

namespace {

std::optional<ExprPtr> resolve_query_name(const Expr& n, const Network& net) {
  auto node = [&](ExprOp op, int index, int sub = -1) {
    auto e = std::make_shared<Expr>(n);
    e->op = op;
    e->index = index;
    e->sub = sub;
    return ExprPtr(e);
  };
  if (!n.qualifier.empty()) {
    const int a = net.find_automaton(n.qualifier);
    if (a >= 0) {
      const int l = net.automata[static_cast<std::size_t>(a)].find_location(n.name);
      if (l >= 0) return node(ExprOp::Location, a, l);
    }
    if (int c = net.find_clock(n.qualifier + "." + n.name); c > 0) return node(ExprOp::Clock, c);
    return std::nullopt;
  }
  if (int v = net.find_variable(n.name); v >= 0) return node(ExprOp::Var, v);
  if (int c = net.find_clock(n.name); c > 0) return node(ExprOp::Clock, c);
  if (int ch = net.find_channel(n.name); ch >= 0) return node(ExprOp::Channel, ch);
  return std::nullopt;
}

bool single_clock_form(const Expr& cmp) {
  const Expr& a = *cmp.args[0];
  const Expr& b = *cmp.args[1];
  return (a.op == ExprOp::Clock && fold_constant(b)) || (b.op == ExprOp::Clock && fold_constant(a));
}

// Clock atoms may only sit under logical connectives for the zone engine.
bool clock_atoms_well_placed(const Expr& e) {
  if (!has_clock(e)) return true;
  if (is_comparison(e.op)) return single_clock_form(e);
  if (is_logical(e.op)) {
    for (const auto& a : e.args)
      if (!clock_atoms_well_placed(*a)) return false;
    return true;
  }
  return false;
}

}  // namespace

BoundQuery bind(const QueryAst& q, const Network& net) {
  std::vector<Diagnostic> diags;
  auto r = [&](const ExprPtr& e) -> ExprPtr {
    if (!e) return e;
    return resolve(e, [&](const Expr& n) { return resolve_query_name(n, net); }, diags);
  };
  BoundQuery b{q};
  QueryAst& a = b.ast;
  a.p = r(a.p);
  a.q = r(a.q);
  a.value = r(a.value);
  a.m1.predicate = r(a.m1.predicate);
  a.m2.predicate = r(a.m2.predicate);
  for (auto& e : a.exprs) e = r(e);
  if (!diags.empty()) throw ParseError(diags);

  if (engine_of(a.kind) == Engine::Classical) {
    for (const ExprPtr& e : {a.p, a.q}) {
      if (!e) continue;
      if (mentions(*e, ExprOp::Channel))
        diags.push_back({"ENGINE_MISMATCH", "channel occurrence atoms are only available to the statistical engine",
                         e->pos, render(*e)});
      if (has_clock(*e)) {
        if (a.kind == QueryKind::AlwaysEventually || a.kind == QueryKind::LeadsTo)
          diags.push_back({"UNSUPPORTED", "clock atoms are not supported in A<> and --> queries", e->pos, render(*e)});
        else if (!clock_atoms_well_placed(*e))
          diags.push_back({"UNSUPPORTED", "query clock atoms must have the form 'clock ~ constant'", e->pos,
                           render(*e)});
      }
    }
  }
  if (!diags.empty()) throw ParseError(diags);
  return b;
}

void require_engine(const BoundQuery& q, Engine engine) {
  if (q.engine() != engine)
    throw ParseError({{"ENGINE_MISMATCH",
                       std::string(to_string(q.ast.kind)) + " queries run on the " +
                           (q.engine() == Engine::Classical ? "classical (check)" : "statistical (smc)") + " engine",
                       q.ast.pos, render_query(q.ast)}});
}

std::vector<std::int64_t> query_max_constants(const BoundQuery& q, const Network& net) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(net.clock_count()) + 1, 0);
  auto visit = [&](const ExprPtr& e) {
    if (!e) return;
    for_each_clock_comparison(*e, [&](const Expr& cmp) {
      for (int side = 0; side < 2; ++side) {
        const Expr& c = *cmp.args[static_cast<std::size_t>(side)];
        const Expr& k = *cmp.args[static_cast<std::size_t>(1 - side)];
        if (c.op != ExprOp::Clock) continue;
        if (auto v = fold_constant(k)) {
          auto& slot = out[static_cast<std::size_t>(c.index)];
          slot = std::max(slot, *v < 0 ? -*v : *v);
        }
      }
    });
  };
  visit(q.ast.p);
  visit(q.ast.q);
  return out;
}

std::vector<QueryLine> parse_query_file(std::string_view text) {
  std::vector<QueryLine> out;
  std::vector<Diagnostic> diags;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == text.npos ? text.npos : nl - start);
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && line[first] != '#') {
      try {
        out.push_back({line_no, std::string(line.substr(first)), parse_query(line)});
      } catch (const ParseError& e) {
        for (auto d : e.diagnostics()) {
          d.pos.line = line_no;
          diags.push_back(d);
        }
      }
    }
    if (nl == text.npos) break;
    start = nl + 1;
  }
  if (!diags.empty()) throw ParseError(diags);
  return out;
}

}  // namespace twinverify
