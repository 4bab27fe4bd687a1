#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "twinverify/expr.hpp"
#include "twinverify/model.hpp"

namespace twinverify {

enum class QueryKind : std::uint8_t {
  // classical
  ExistsEventually,  // E<> p
  AlwaysGlobally,    // A[] p
  AlwaysEventually,  // A<> p
  LeadsTo,           // p --> q
  DeadlockFree,      // A[] not deadlock
  // statistical
  ProbEstimate,   // Pr[<=T](<> p)
  ProbTest,       // Pr[<=T](<> p) >= theta
  ProbCompare,    // Pr[<=T](<> p) >= Pr[<=T](<> q)
  ValueEstimate,  // E[<=T; N](max: e)
  Simulate,       // simulate N [<=T] {e1, e2}
};

enum class Engine : std::uint8_t { Classical, Statistical };

Engine engine_of(QueryKind kind);
const char* to_string(QueryKind kind);
const char* to_string(Engine e);

enum class MonitorShape : std::uint8_t { EventuallyWithin, GloballyWithin };

/// Bounded MITL monitor `<> p` / `[] p` over the time window [0, bound].
struct Monitor {
  MonitorShape shape = MonitorShape::EventuallyWithin;
  std::int64_t bound = 0;
  ExprPtr predicate;
};

enum class Direction : std::uint8_t { Auto, AtLeast, AtMost };
enum class Reduce : std::uint8_t { Max, Min };

struct QueryAst {
  QueryKind kind = QueryKind::ExistsEventually;
  ExprPtr p;  // classical operand; left side of -->
  ExprPtr q;  // right side of -->
  Monitor m1;
  Monitor m2;
  Direction direction = Direction::Auto;  // comparator for ProbTest
  double threshold = 0;                   // theta for ProbTest
  Reduce reduce = Reduce::Max;
  ExprPtr value;
  std::int64_t time_bound = 0;  // ValueEstimate / Simulate
  std::int64_t runs = 0;        // ValueEstimate / Simulate
  std::vector<ExprPtr> exprs;   // Simulate
  SourcePos pos;
};

/// Parses one query (see docs/query-language.md). Throws ParseError.
QueryAst parse_query(std::string_view text);

/// Canonical text; parse_query(render_query(q)) equals q.
std::string render_query(const QueryAst& q);

bool same_query(const QueryAst& a, const QueryAst& b);

/// A query with every identifier resolved against a network.
struct BoundQuery {
  QueryAst ast;
  Engine engine() const { return engine_of(ast.kind); }
};

/// Resolves identifiers: `Proc.Loc` location tests, `Proc.clk` sojourn
/// clocks, global clocks and variables, and channel names (statistical
/// queries only: true at the instant of a synchronization on that channel).
/// Codes: UNDECLARED, ENGINE_MISMATCH, UNSUPPORTED.
BoundQuery bind(const QueryAst& q, const Network& net);

/// ENGINE_MISMATCH diagnostic when the query belongs to the other engine.
void require_engine(const BoundQuery& q, Engine engine);

/// Largest constant each clock is compared against in the query, indexed by
/// clock id. Merged with the network's constants before zone extrapolation.
std::vector<std::int64_t> query_max_constants(const BoundQuery& q, const Network& net);

struct QueryLine {
  int line = 0;
  std::string text;
  QueryAst ast;
};

/// Query file: one query per line, `#` comments, blank lines ignored.
std::vector<QueryLine> parse_query_file(std::string_view text);

}  // namespace twinverify
