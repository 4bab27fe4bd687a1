#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "nets.hpp"
#include "twinverify/casestudy.hpp"
#include "twinverify/query.hpp"
#include "twinverify/rng.hpp"

using namespace twinverify;
using testing::net_of;

namespace {

// First diagnostic of a failing parse or bind, empty code when none.
template <class F>
Diagnostic first_diag(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    REQUIRE_FALSE(e.diagnostics().empty());
    return e.diagnostics().front();
  }
  return {};
}

// Random expression over a small vocabulary. Integers stay non-negative so
// that `-k` only ever appears as an explicit negation node.
ExprPtr random_expr(Rng& rng, int depth) {
  if (depth == 0 || rng.bernoulli(0.3)) {
    switch (rng.index(4)) {
      case 0: return make_int(static_cast<std::int64_t>(rng.index(50)));
      case 1: return make_bool(rng.bernoulli(0.5));
      case 2: return make_name("", rng.bernoulli(0.5) ? "x" : "count");
      default: return make_name(rng.bernoulli(0.5) ? "P" : "Q", rng.bernoulli(0.5) ? "L0" : "t");
    }
  }
  static const ExprOp binary[] = {ExprOp::Mul, ExprOp::Div, ExprOp::Mod, ExprOp::Add, ExprOp::Sub,
                                  ExprOp::Lt,  ExprOp::Le,  ExprOp::Eq,  ExprOp::Ne,  ExprOp::Ge,
                                  ExprOp::Gt,  ExprOp::And, ExprOp::Or,  ExprOp::Imply};
  if (rng.bernoulli(0.2))
    return make_unary(rng.bernoulli(0.5) ? ExprOp::Not : ExprOp::Neg, random_expr(rng, depth - 1));
  const ExprOp op = binary[rng.index(std::size(binary))];
  return make_binary(op, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
}

Monitor random_monitor(Rng& rng) {
  Monitor m;
  m.shape = rng.bernoulli(0.5) ? MonitorShape::EventuallyWithin : MonitorShape::GloballyWithin;
  m.bound = 1 + static_cast<std::int64_t>(rng.index(20000));
  m.predicate = random_expr(rng, 3);
  return m;
}

QueryAst random_query(Rng& rng) {
  QueryAst q;
  q.kind = static_cast<QueryKind>(rng.index(10));
  switch (q.kind) {
    case QueryKind::ExistsEventually:
    case QueryKind::AlwaysGlobally:
    case QueryKind::AlwaysEventually: q.p = random_expr(rng, 3); break;
    case QueryKind::LeadsTo:
      q.p = random_expr(rng, 3);
      q.q = random_expr(rng, 3);
      break;
    case QueryKind::DeadlockFree: break;
    case QueryKind::ProbEstimate: q.m1 = random_monitor(rng); break;
    case QueryKind::ProbTest:
      q.m1 = random_monitor(rng);
      q.direction = rng.bernoulli(0.5) ? Direction::AtLeast : Direction::AtMost;
      q.threshold = static_cast<double>(rng.index(101)) / 100.0;
      break;
    case QueryKind::ProbCompare:
      q.m1 = random_monitor(rng);
      q.m2 = random_monitor(rng);
      q.m2.bound = q.m1.bound;
      break;
    case QueryKind::ValueEstimate:
      q.time_bound = 1 + static_cast<std::int64_t>(rng.index(10000));
      q.runs = 1 + static_cast<std::int64_t>(rng.index(500));
      q.reduce = rng.bernoulli(0.5) ? Reduce::Max : Reduce::Min;
      q.value = random_expr(rng, 3);
      break;
    case QueryKind::Simulate:
      q.time_bound = 1 + static_cast<std::int64_t>(rng.index(10000));
      q.runs = 1 + static_cast<std::int64_t>(rng.index(500));
      for (std::uint64_t k = 0, n = 1 + rng.index(4); k < n; ++k) q.exprs.push_back(random_expr(rng, 2));
      break;
  }
  return q;
}

}  // namespace

TEST_SUITE("query") {
  TEST_CASE("deadlock freedom has its own kind") {
    const QueryAst q = parse_query("A[] not deadlock");
    CHECK(q.kind == QueryKind::DeadlockFree);
    CHECK(engine_of(q.kind) == Engine::Classical);
  }

  TEST_CASE("probability estimate carries its time bound") {
    const QueryAst q = parse_query("Pr[<=10000](<> Controller.Sent)");
    CHECK(q.kind == QueryKind::ProbEstimate);
    CHECK(q.m1.shape == MonitorShape::EventuallyWithin);
    CHECK(q.m1.bound == 10000);
    REQUIRE(q.m1.predicate);
    CHECK(q.m1.predicate->qualifier == "Controller");
    CHECK(q.m1.predicate->name == "Sent");
    CHECK(engine_of(q.kind) == Engine::Statistical);
  }

  TEST_CASE("missing operand is reported at the closing parenthesis") {
    const Diagnostic d = first_diag([] { parse_query("E<> (x == )"); });
    CHECK(d.pos.line == 1);
    CHECK(d.pos.column == 11);
  }

  TEST_CASE("every form of the grammar parses to its kind") {
    CHECK(parse_query("E<> P.L").kind == QueryKind::ExistsEventually);
    CHECK(parse_query("A[] x <= 3").kind == QueryKind::AlwaysGlobally);
    CHECK(parse_query("A<> P.L").kind == QueryKind::AlwaysEventually);
    CHECK(parse_query("P.L --> Q.L").kind == QueryKind::LeadsTo);
    CHECK(parse_query("Pr[<=5]([] P.L)").m1.shape == MonitorShape::GloballyWithin);
    const QueryAst test = parse_query("Pr[<=5](<> P.L) >= 0.75");
    CHECK(test.kind == QueryKind::ProbTest);
    CHECK(test.threshold == doctest::Approx(0.75));
    CHECK(parse_query("Pr[<=5](<> P.L) >= Pr[<=5](<> Q.L)").kind == QueryKind::ProbCompare);
    const QueryAst value = parse_query("E[<=100; 20](max: x * 2)");
    CHECK(value.kind == QueryKind::ValueEstimate);
    CHECK(value.time_bound == 100);
    CHECK(value.runs == 20);
    const QueryAst sim = parse_query("simulate 7 [<=30] {x, P.t}");
    CHECK(sim.kind == QueryKind::Simulate);
    CHECK(sim.runs == 7);
    CHECK(sim.exprs.size() == 2);
  }

  TEST_CASE("non-positive time bounds are rejected") {
    CHECK_THROWS_AS(parse_query("Pr[<=0](<> P.L)"), ParseError);
    CHECK_THROWS_AS(parse_query("simulate 3 [<=0] {x}"), ParseError);
  }

  TEST_CASE("precedence: not binds tighter than and, and tighter than imply") {
    const QueryAst q = parse_query("A[] not a.b and c or d imply e");
    REQUIRE(q.p);
    CHECK(q.p->op == ExprOp::Imply);
    CHECK(q.p->args[0]->op == ExprOp::Or);
    CHECK(q.p->args[0]->args[0]->op == ExprOp::And);
    CHECK(q.p->args[0]->args[0]->args[0]->op == ExprOp::Not);
  }

  TEST_CASE("deadlock query binds against any net") {
    const Network net = net_of(testing::kHandshake);
    CHECK(bind(parse_query("A[] not deadlock"), net).ast.kind == QueryKind::DeadlockFree);
  }

  TEST_CASE("unknown location is undeclared") {
    const Network net = net_of(testing::kHandshake);
    const Diagnostic d = first_diag([&] { bind(parse_query("Pr[<=100](<> NoSuch.Loc)"), net); });
    CHECK(d.code == "UNDECLARED");
    CHECK(d.element.find("NoSuch") != std::string::npos);
  }

  TEST_CASE("classical query routed to the statistical runner") {
    const Network net = net_of(testing::kHandshake);
    const BoundQuery b = bind(parse_query("E<> A.Wait"), net);
    CHECK(first_diag([&] { require_engine(b, Engine::Statistical); }).code == "ENGINE_MISMATCH");
    CHECK_NOTHROW(require_engine(b, Engine::Classical));
    const BoundQuery s = bind(parse_query("Pr[<=10](<> A.Wait)"), net);
    CHECK(first_diag([&] { require_engine(s, Engine::Classical); }).code == "ENGINE_MISMATCH");
  }

  TEST_CASE("channel atoms belong to the statistical engine") {
    const Network net = net_of(testing::kHandshake);
    CHECK(first_diag([&] { bind(parse_query("E<> ping"), net); }).code == "ENGINE_MISMATCH");
    CHECK_NOTHROW(bind(parse_query("Pr[<=10](<> ping)"), net));
  }

  TEST_CASE("clock atoms are rejected under eventuality operators") {
    const Network net = net_of(testing::kHandshake);
    CHECK(first_diag([&] { bind(parse_query("A<> A.t >= 1"), net); }).code == "UNSUPPORTED");
    CHECK(first_diag([&] { bind(parse_query("A.Wait --> A.t >= 1"), net); }).code == "UNSUPPORTED");
    CHECK(first_diag([&] { bind(parse_query("E<> A.t + 1 >= B.t"), net); }).code == "UNSUPPORTED");
    CHECK_NOTHROW(bind(parse_query("E<> (A.Wait and A.t >= 1)"), net));
  }

  TEST_CASE("query clock constants feed extrapolation") {
    const Network net = net_of(testing::kHandshake);
    const BoundQuery b = bind(parse_query("E<> (A.Wait and A.t >= 7)"), net);
    const auto k = query_max_constants(b, net);
    REQUIRE(k.size() == static_cast<std::size_t>(net.clock_count()) + 1);
    CHECK(k[static_cast<std::size_t>(net.automata[0].sojourn_clock)] == 7);
  }

  TEST_CASE("query files skip comments and blank lines") {
    const auto lines = parse_query_file("# header\n\nE<> P.L\n  # indented\nA[] not deadlock\n");
    REQUIRE(lines.size() == 2);
    CHECK(lines[0].line == 3);
    CHECK(lines[1].ast.kind == QueryKind::DeadlockFree);
    const Diagnostic d = first_diag([] { parse_query_file("E<> P.L\nE<> (\n"); });
    CHECK(d.pos.line == 2);
  }

  TEST_CASE("the shipped property suite parses and binds") {
    const std::filesystem::path dir = TWINVERIFY_TEST_DATA_DIR;
    const auto rows = parse_suite(testing::slurp(dir / "dt" / "suite.tvq"));
    std::set<int> ids;
    for (const auto& row : rows) ids.insert(row.id);
    CHECK(ids.size() == 13);
    CHECK(*ids.begin() == 1);
    CHECK(*ids.rbegin() == 13);
    CaseStudyConfig cfg;
    cfg.data_dir = dir / "dt";
    const SuiteDefinition suite = build_case_study(cfg);
    for (const auto& row : suite.rows) {
      CAPTURE(row.text);
      CHECK(engine_of(row.ast.kind) == row.engine);
      CHECK_NOTHROW(bind(row.ast, row.engine == Engine::Classical ? suite.ta : suite.sta));
    }
  }

  TEST_CASE("property: rendering round-trips random queries") {
    Rng rng(4242);
    for (int t = 0; t < 2000; ++t) {
      const QueryAst q = random_query(rng);
      const std::string text = render_query(q);
      CAPTURE(text);
      const QueryAst back = parse_query(text);
      CHECK(same_query(q, back));
      CHECK(render_query(back) == text);
    }
  }
}
