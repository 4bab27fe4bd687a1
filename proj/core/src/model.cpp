#include "twinverify/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace twinverify {

const char* to_string(Rel r) {
  switch (r) {
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Eq: return "==";
    case Rel::Ge: return ">=";
    case Rel::Gt: return ">";
  }
  return "?";
}

int Automaton::find_location(std::string_view n) const {
  for (std::size_t i = 0; i < locations.size(); ++i)
    if (locations[i].name == n) return static_cast<int>(i);
  return -1;
}

int Network::find_automaton(std::string_view n) const {
  for (std::size_t i = 0; i < automata.size(); ++i)
    if (automata[i].name == n) return static_cast<int>(i);
  return -1;
}

int Network::find_clock(std::string_view n) const {
  for (std::size_t i = 0; i < clocks.size(); ++i)
    if (clocks[i].name == n) return static_cast<int>(i) + 1;
  return 0;
}

int Network::find_variable(std::string_view n) const {
  for (std::size_t i = 0; i < variables.size(); ++i)
    if (variables[i].name == n) return static_cast<int>(i);
  return -1;
}

int Network::find_channel(std::string_view n) const {
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i] == n) return static_cast<int>(i);
  return -1;
}

std::vector<ClockConstraint> Network::invariant_of(int a, int l) const {
  const Automaton& aut = automata[static_cast<std::size_t>(a)];
  const Location& loc = aut.locations[static_cast<std::size_t>(l)];
  auto inv = loc.invariant;
  if (loc.delay.kind == Delay::Kind::Fixed)
    inv.push_back({aut.sojourn_clock, 0, Rel::Le, loc.delay.fixed});
  return inv;
}

std::vector<ClockConstraint> Network::guard_of(int a, int e) const {
  const Automaton& aut = automata[static_cast<std::size_t>(a)];
  const Edge& edge = aut.edges[static_cast<std::size_t>(e)];
  auto g = edge.clock_guard;
  const Location& src = aut.locations[static_cast<std::size_t>(edge.source)];
  if (edge.is_active() && src.delay.kind == Delay::Kind::Fixed)
    g.push_back({aut.sojourn_clock, 0, Rel::Ge, src.delay.fixed});
  return g;
}

bool Network::resets_sojourn(int a, int e) const {
  const Edge& edge = automata[static_cast<std::size_t>(a)].edges[static_cast<std::size_t>(e)];
  return edge.is_active() || edge.source != edge.target;
}

bool Network::has_empirical_delays() const {
  for (const auto& a : automata)
    for (const auto& l : a.locations)
      if (l.delay.kind == Delay::Kind::Empirical) return true;
  return false;
}

void Network::finalize() {
  max_constant.assign(clocks.size() + 1, 0);
  auto bump = [&](const ClockConstraint& c) {
    const std::int64_t k = c.bound < 0 ? -c.bound : c.bound;
    max_constant[static_cast<std::size_t>(c.clock)] = std::max(max_constant[static_cast<std::size_t>(c.clock)], k);
    if (c.other != 0)
      max_constant[static_cast<std::size_t>(c.other)] = std::max(max_constant[static_cast<std::size_t>(c.other)], k);
  };
  for (std::size_t a = 0; a < automata.size(); ++a) {
    for (std::size_t l = 0; l < automata[a].locations.size(); ++l)
      for (const auto& c : invariant_of(static_cast<int>(a), static_cast<int>(l))) bump(c);
    for (std::size_t e = 0; e < automata[a].edges.size(); ++e)
      for (const auto& c : guard_of(static_cast<int>(a), static_cast<int>(e))) bump(c);
  }
}

DistributionLoader file_loader(std::filesystem::path base_dir) {
  return [base = std::move(base_dir)](const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative()) p = base / p;
    std::ifstream in(p, std::ios::binary);
    if (!in) throw TimingError("cannot open histogram file '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ingest_histogram(ss.str());
  };
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct RawEdge {
  Token source;
  Token target;
  ExprPtr guard;
  bool has_sync = false;
  Token sync_channel;
  bool emit = false;
  std::vector<Token> resets;
  std::vector<std::pair<Token, ExprPtr>> updates;
  SourcePos pos;
};

std::optional<Rel> rel_of(ExprOp op) {
  switch (op) {
    case ExprOp::Lt: return Rel::Lt;
    case ExprOp::Le: return Rel::Le;
    case ExprOp::Eq: return Rel::Eq;
    case ExprOp::Ge: return Rel::Ge;
    case ExprOp::Gt: return Rel::Gt;
    default: return std::nullopt;
  }
}

Rel flip(Rel r) {
  switch (r) {
    case Rel::Lt: return Rel::Gt;
    case Rel::Le: return Rel::Ge;
    case Rel::Ge: return Rel::Le;
    case Rel::Gt: return Rel::Lt;
    default: return r;
  }
}

class ModelParser {
public:
  ModelParser(std::string_view text, const DistributionLoader& loader)
      : ts_(tokenize(text)), loader_(loader) {}

  Network run() {
    for (;;) {
      ts_.skip_newlines();
      if (ts_.at_end()) break;
      try {
        statement();
      } catch (const ParseError& e) {
        for (const auto& d : e.diagnostics()) diags_.push_back(d);
        recover();
      } catch (const TimingError& e) {
        diags_.push_back({"DIST_INVALID", e.what(), last_pos_, ""});
        recover();
      }
    }
    if (net_.automata.empty() && diags_.empty())
      diags_.push_back({"NO_AUTOMATA", "model declares no process", ts_.peek().pos, ""});
    if (!diags_.empty()) throw ParseError(diags_);
    net_.finalize();
    return std::move(net_);
  }

private:
  void recover() {
    // Skip to the end of the current line; inside a process body keep going
    // line by line so later statements still get checked.
    while (!ts_.at_end() && ts_.peek().kind != TokenKind::Newline) ts_.next();
  }

  void end_of_line() {
    const Token& t = ts_.peek();
    if (t.kind != TokenKind::Newline && t.kind != TokenKind::End) ts_.fail(t, "end of line");
  }

  void declare(const Token& name) {
    if (!globals_.insert(name.text).second)
      throw ParseError({{"DUP_ID", "duplicate identifier '" + name.text + "'", name.pos, name.text}});
  }

  void statement() {
    const Token& t = ts_.peek();
    last_pos_ = t.pos;
    if (t.is_ident("clock")) {
      ts_.next();
      do {
        const Token& n = ts_.expect_kind(TokenKind::Ident, "clock name");
        declare(n);
        net_.clocks.push_back({n.text, -1, n.text});
      } while (ts_.accept(","));
      end_of_line();
    } else if (t.is_ident("int")) {
      ts_.next();
      const Token& n = ts_.expect_kind(TokenKind::Ident, "variable name");
      Variable v;
      v.name = n.text;
      ts_.expect("[");
      v.min = signed_int();
      ts_.expect(",");
      v.max = signed_int();
      ts_.expect("]");
      v.init = v.min;
      if (ts_.accept("=")) v.init = signed_int();
      end_of_line();
      declare(n);
      net_.variables.push_back(v);
    } else if (t.is_ident("chan")) {
      ts_.next();
      do {
        const Token& n = ts_.expect_kind(TokenKind::Ident, "channel name");
        declare(n);
        net_.channels.push_back(n.text);
      } while (ts_.accept(","));
      end_of_line();
    } else if (t.is_ident("dist")) {
      ts_.next();
      distribution();
    } else if (t.is_ident("process")) {
      ts_.next();
      process();
    } else {
      ts_.fail(t, "'clock', 'int', 'chan', 'dist' or 'process'");
    }
  }

  std::int64_t signed_int() {
    bool neg = ts_.accept("-");
    const Token& n = ts_.expect_kind(TokenKind::Int, "integer");
    std::int64_t v = std::stoll(n.text);
    return neg ? -v : v;
  }

  double number() {
    const Token& t = ts_.peek();
    if (t.kind != TokenKind::Int && t.kind != TokenKind::Real) ts_.fail(t, "number");
    ts_.next();
    return std::stod(t.text);
  }

  void distribution() {
    const Token& n = ts_.expect_kind(TokenKind::Ident, "distribution name");
    ts_.expect("=");
    if (ts_.peek().kind == TokenKind::String) {
      const Token& path = ts_.next();
      end_of_line();
      declare(n);
      if (!loader_)
        throw ParseError({{"DIST_UNRESOLVED", "no loader for histogram file '" + path.text + "'", path.pos, n.text}});
      try {
        net_.distributions[n.text] = loader_(path.text);
      } catch (const TimingError& e) {
        throw ParseError({{"DIST_INVALID", e.what(), path.pos, n.text}});
      }
      net_.distribution_files[n.text] = path.text;
      return;
    }
    ts_.expect("{");
    std::vector<Bucket> buckets;
    do {
      Bucket b;
      ts_.expect("[");
      b.lo = number();
      ts_.expect(",");
      b.hi = number();
      ts_.expect(")");
      ts_.expect(":");
      const Token& c = ts_.expect_kind(TokenKind::Int, "bucket count");
      b.count = std::stoull(c.text);
      buckets.push_back(b);
    } while (ts_.accept(","));
    ts_.expect("}");
    end_of_line();
    declare(n);
    try {
      net_.distributions[n.text] = EmpiricalDistribution(std::move(buckets));
    } catch (const TimingError& e) {
      throw ParseError({{"DIST_INVALID", e.what(), n.pos, n.text}});
    }
  }

  void process() {
    const Token name = ts_.expect_kind(TokenKind::Ident, "process name");
    std::string local = "t";
    if (ts_.accept_ident("clock")) local = ts_.expect_kind(TokenKind::Ident, "clock name").text;
    ts_.expect("{");
    end_of_line();
    declare(name);

    Automaton aut;
    aut.name = name.text;
    const int aidx = static_cast<int>(net_.automata.size());
    net_.clocks.push_back({name.text + "." + local, aidx, local});
    aut.sojourn_clock = static_cast<int>(net_.clocks.size());
    current_ = aidx;
    current_local_ = local;

    std::vector<RawEdge> raw_edges;
    int initial = -1;
    bool closed = false;
    while (!closed) {
      ts_.skip_newlines();
      const Token& t = ts_.peek();
      if (t.kind == TokenKind::End) {
        diags_.push_back({"SYNTAX", "missing '}' closing process '" + name.text + "'", t.pos, name.text});
        break;
      }
      try {
        if (t.is("}")) {
          ts_.next();
          end_of_line();
          closed = true;
        } else if (t.is_ident("loc")) {
          ts_.next();
          location(aut, initial);
        } else if (t.is_ident("edge")) {
          ts_.next();
          raw_edges.push_back(edge());
        } else {
          ts_.fail(t, "'loc', 'edge' or '}'");
        }
      } catch (const ParseError& e) {
        for (const auto& d : e.diagnostics()) diags_.push_back(d);
        recover();
      }
    }
    if (aut.locations.empty())
      diags_.push_back({"NO_LOCATIONS", "process '" + name.text + "' has no locations", name.pos, name.text});
    aut.initial = initial < 0 ? 0 : initial;
    for (auto& re : raw_edges) {
      try {
        aut.edges.push_back(resolve_edge(aut, re));
      } catch (const ParseError& e) {
        for (const auto& d : e.diagnostics()) diags_.push_back(d);
      }
    }
    net_.automata.push_back(std::move(aut));
    current_ = -1;
  }

  void location(Automaton& aut, int& initial) {
    const Token& n = ts_.expect_kind(TokenKind::Ident, "location name");
    if (aut.find_location(n.text) >= 0)
      throw ParseError({{"DUP_ID", "duplicate location '" + n.text + "'", n.pos, aut.name + "." + n.text}});
    Location loc;
    loc.name = n.text;
    loc.pos = n.pos;
    bool is_init = false;
    for (;;) {
      const Token& t = ts_.peek();
      if (t.is_ident("init")) {
        ts_.next();
        is_init = true;
      } else if (t.is_ident("inv")) {
        ts_.next();
        auto e = parse_expr(ts_);
        for (const auto& atom : conjuncts(bind(e))) {
          auto c = clock_constraint(*atom);
          if (!c)
            throw ParseError({{"SYNTAX", "invariant atoms must be clock constraints", atom->pos, render(*atom)}});
          loc.invariant.push_back(*c);
        }
      } else if (t.is_ident("delay")) {
        ts_.next();
        if (ts_.accept_ident("fixed")) {
          loc.delay = Delay::fixed_ms(signed_int());
        } else if (ts_.accept_ident("empirical")) {
          loc.delay = Delay::empirical(ts_.expect_kind(TokenKind::Ident, "distribution name").text);
        } else {
          ts_.fail(ts_.peek(), "'fixed' or 'empirical'");
        }
      } else if (t.is_ident("rate")) {
        ts_.next();
        loc.rate = number();
      } else {
        break;
      }
    }
    end_of_line();
    if (is_init) {
      if (initial >= 0)
        throw ParseError({{"DUP_INIT", "process '" + aut.name + "' has more than one initial location", n.pos, n.text}});
      initial = static_cast<int>(aut.locations.size());
    }
    aut.locations.push_back(std::move(loc));
  }

  RawEdge edge() {
    RawEdge re;
    re.pos = ts_.peek().pos;
    re.source = ts_.expect_kind(TokenKind::Ident, "source location");
    ts_.expect("->");
    re.target = ts_.expect_kind(TokenKind::Ident, "target location");
    for (;;) {
      const Token& t = ts_.peek();
      if (t.is_ident("guard")) {
        ts_.next();
        re.guard = parse_expr(ts_);
      } else if (t.is_ident("sync")) {
        ts_.next();
        re.has_sync = true;
        re.sync_channel = ts_.expect_kind(TokenKind::Ident, "channel name");
        if (ts_.accept("!")) re.emit = true;
        else if (ts_.accept("?")) re.emit = false;
        else ts_.fail(ts_.peek(), "'!' or '?'");
      } else if (t.is_ident("reset")) {
        ts_.next();
        do {
          Token c = ts_.expect_kind(TokenKind::Ident, "clock name");
          if (ts_.peek().is(".") && ts_.peek(1).kind == TokenKind::Ident) {
            ts_.next();
            c.text += "." + ts_.next().text;
          }
          re.resets.push_back(c);
        } while (ts_.accept(","));
      } else if (t.is_ident("update")) {
        ts_.next();
        do {
          Token v = ts_.expect_kind(TokenKind::Ident, "variable name");
          ts_.expect("=");
          re.updates.emplace_back(v, parse_expr(ts_));
        } while (ts_.accept(","));
      } else {
        break;
      }
    }
    end_of_line();
    return re;
  }

  std::optional<ExprPtr> resolve_name(const Expr& n) const {
    auto node = [&](ExprOp op, int index) {
      auto e = std::make_shared<Expr>(n);
      e->op = op;
      e->index = index;
      return ExprPtr(e);
    };
    if (n.qualifier.empty()) {
      if (current_ >= 0 && n.name == current_local_)
        return node(ExprOp::Clock, net_.automata.size() == static_cast<std::size_t>(current_)
                                       ? static_cast<int>(net_.clocks.size())
                                       : net_.automata[static_cast<std::size_t>(current_)].sojourn_clock);
      if (int c = net_.find_clock(n.name); c > 0 && net_.clocks[static_cast<std::size_t>(c - 1)].owner < 0)
        return node(ExprOp::Clock, c);
      if (int v = net_.find_variable(n.name); v >= 0) return node(ExprOp::Var, v);
      return std::nullopt;
    }
    if (int c = net_.find_clock(n.qualifier + "." + n.name); c > 0) return node(ExprOp::Clock, c);
    return std::nullopt;
  }

  ExprPtr bind(const ExprPtr& e) {
    std::vector<Diagnostic> d;
    auto r = resolve(e, [this](const Expr& n) { return resolve_name(n); }, d);
    if (!d.empty()) throw ParseError(d);
    return r;
  }

  int clock_id(const Token& t) const {
    Expr n;
    const auto dot = t.text.find('.');
    if (dot == std::string::npos) {
      n.name = t.text;
    } else {
      n.qualifier = t.text.substr(0, dot);
      n.name = t.text.substr(dot + 1);
    }
    auto r = resolve_name(n);
    if (!r || (*r)->op != ExprOp::Clock)
      throw ParseError({{"UNDECLARED", "undeclared clock '" + t.text + "'", t.pos, t.text}});
    return (*r)->index;
  }

  std::optional<ClockConstraint> clock_constraint(const Expr& atom) const {
    if (!has_clock(atom)) return std::nullopt;
    auto rel = rel_of(atom.op);
    if (!rel)
      throw ParseError({{"SYNTAX", "clock constraint needs one of < <= == >= >", atom.pos, render(atom)}});
    const Expr* lhs = atom.args[0].get();
    const Expr* rhs = atom.args[1].get();
    if (has_clock(*rhs)) {
      std::swap(lhs, rhs);
      *rel = flip(*rel);
    }
    auto k = fold_constant(*rhs);
    if (!k || has_clock(*rhs))
      throw ParseError({{"SYNTAX", "clock constraint bound must be an integer constant", rhs->pos, render(atom)}});
    if (lhs->op == ExprOp::Clock) return ClockConstraint{lhs->index, 0, *rel, *k};
    if (lhs->op == ExprOp::Sub && lhs->args[0]->op == ExprOp::Clock && lhs->args[1]->op == ExprOp::Clock)
      return ClockConstraint{lhs->args[0]->index, lhs->args[1]->index, *rel, *k};
    throw ParseError({{"SYNTAX", "unsupported clock constraint form", atom.pos, render(atom)}});
  }

  Edge resolve_edge(const Automaton& aut, const RawEdge& re) {
    Edge e;
    e.pos = re.pos;
    e.source = aut.find_location(re.source.text);
    e.target = aut.find_location(re.target.text);
    if (e.source < 0)
      throw ParseError({{"UNDECLARED", "undeclared location '" + re.source.text + "'", re.source.pos, re.source.text}});
    if (e.target < 0)
      throw ParseError({{"UNDECLARED", "undeclared location '" + re.target.text + "'", re.target.pos, re.target.text}});
    const int saved = current_;
    current_ = static_cast<int>(net_.automata.size());
    current_local_ = net_.clocks.back().local;
    struct Restore {
      int& slot;
      int value;
      ~Restore() { slot = value; }
    } restore{current_, saved};
    if (re.guard) {
      for (const auto& atom : conjuncts(bind(re.guard))) {
        if (auto c = clock_constraint(*atom)) e.clock_guard.push_back(*c);
        else e.data_guard.push_back(atom);
      }
    }
    if (re.has_sync) {
      const int ch = net_.find_channel(re.sync_channel.text);
      if (ch < 0)
        throw ParseError({{"UNDECLARED", "undeclared channel '" + re.sync_channel.text + "'",
                           re.sync_channel.pos, re.sync_channel.text}});
      e.sync = {re.emit ? SyncKind::Emit : SyncKind::Receive, ch};
    }
    for (const auto& r : re.resets) e.resets.push_back(clock_id(r));
    for (const auto& [v, expr] : re.updates) {
      const int var = net_.find_variable(v.text);
      if (var < 0) throw ParseError({{"UNDECLARED", "undeclared variable '" + v.text + "'", v.pos, v.text}});
      auto bound = bind(expr);
      if (has_clock(*bound))
        throw ParseError({{"SYNTAX", "updates cannot read clocks", expr->pos, render(*expr)}});
      e.updates.push_back({var, bound});
    }
    return e;
  }

  TokenStream ts_;
  const DistributionLoader& loader_;
  Network net_;
  std::set<std::string> globals_;
  std::vector<Diagnostic> diags_;
  int current_ = -1;
  std::string current_local_;
  SourcePos last_pos_;
};

std::string fmt_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Network parse_model(std::string_view text, const DistributionLoader& loader) {
  return ModelParser(text, loader).run();
}

Network load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), file_loader(path.parent_path()));
}

// ---------------------------------------------------------------------------
// Rendering

std::string render_constraint(const Network& net, const ClockConstraint& c, int ctx) {
  auto name = [&](int id) {
    const ClockDecl& d = net.clocks[static_cast<std::size_t>(id - 1)];
    return d.owner >= 0 && d.owner == ctx ? d.local : d.name;
  };
  std::string lhs = name(c.clock);
  if (c.other != 0) lhs += " - " + name(c.other);
  return lhs + " " + to_string(c.rel) + " " + std::to_string(c.bound);
}

namespace {

std::string render_expr_in(const Network& net, const Expr& e, int ctx) {
  // Sojourn clocks of the current process print by their local name.
  if (e.op == ExprOp::Clock) {
    const ClockDecl& d = net.clocks[static_cast<std::size_t>(e.index - 1)];
    return d.owner >= 0 && d.owner == ctx ? d.local : d.name;
  }
  return render(e);
}

}  // namespace

std::string render_model(const Network& net) {
  std::ostringstream os;
  if (!net.channels.empty()) {
    os << "chan ";
    for (std::size_t i = 0; i < net.channels.size(); ++i) os << (i ? ", " : "") << net.channels[i];
    os << "\n";
  }
  for (const auto& v : net.variables)
    os << "int " << v.name << "[" << v.min << "," << v.max << "] = " << v.init << "\n";
  for (const auto& [id, d] : net.distributions) {
    os << "dist " << id << " = ";
    if (auto f = net.distribution_files.find(id); f != net.distribution_files.end()) {
      os << '"' << f->second << '"' << "\n";
      continue;
    }
    os << "{";
    for (std::size_t i = 0; i < d.buckets().size(); ++i) {
      const auto& b = d.buckets()[i];
      os << (i ? ", " : "") << "[" << fmt_real(b.lo) << "," << fmt_real(b.hi) << "):" << b.count;
    }
    os << "}\n";
  }
  for (std::size_t ci = 0; ci < net.clocks.size(); ++ci) {
    const ClockDecl& cd = net.clocks[ci];
    if (cd.owner < 0) {
      os << "clock " << cd.name << "\n";
      continue;
    }
    const int a = cd.owner;
    const Automaton& aut = net.automata[static_cast<std::size_t>(a)];
    os << "process " << aut.name << " clock " << cd.local << " {\n";
    for (std::size_t l = 0; l < aut.locations.size(); ++l) {
      const Location& loc = aut.locations[l];
      os << "  loc " << loc.name;
      if (static_cast<int>(l) == aut.initial) os << " init";
      if (!loc.invariant.empty()) {
        os << " inv ";
        for (std::size_t i = 0; i < loc.invariant.size(); ++i)
          os << (i ? " && " : "") << render_constraint(net, loc.invariant[i], a);
      }
      if (loc.delay.kind == Delay::Kind::Fixed) os << " delay fixed " << loc.delay.fixed;
      if (loc.delay.kind == Delay::Kind::Empirical) os << " delay empirical " << loc.delay.distribution;
      if (loc.rate) os << " rate " << fmt_real(*loc.rate);
      os << "\n";
    }
    for (const auto& e : aut.edges) {
      os << "  edge " << aut.locations[static_cast<std::size_t>(e.source)].name << " -> "
         << aut.locations[static_cast<std::size_t>(e.target)].name;
      if (!e.clock_guard.empty() || !e.data_guard.empty()) {
        os << " guard ";
        bool first = true;
        for (const auto& c : e.clock_guard) {
          os << (first ? "" : " && ") << render_constraint(net, c, a);
          first = false;
        }
        for (const auto& g : e.data_guard) {
          // Disjunctions and implications must stay grouped inside the conjunction.
          const bool paren = g->op == ExprOp::Or || g->op == ExprOp::Imply || g->op == ExprOp::And;
          os << (first ? "" : " && ") << (paren ? "(" : "") << render_expr_in(net, *g, a) << (paren ? ")" : "");
          first = false;
        }
      }
      if (e.sync.kind != SyncKind::Internal)
        os << " sync " << net.channels[static_cast<std::size_t>(e.sync.channel)]
           << (e.sync.kind == SyncKind::Emit ? "!" : "?");
      if (!e.resets.empty()) {
        os << " reset ";
        for (std::size_t i = 0; i < e.resets.size(); ++i) {
          const ClockDecl& d = net.clocks[static_cast<std::size_t>(e.resets[i] - 1)];
          os << (i ? ", " : "") << (d.owner == a ? d.local : d.name);
        }
      }
      if (!e.updates.empty()) {
        os << " update ";
        for (std::size_t i = 0; i < e.updates.size(); ++i)
          os << (i ? ", " : "") << net.variables[static_cast<std::size_t>(e.updates[i].var)].name << " = "
             << render(*e.updates[i].value);
      }
      os << "\n";
    }
    os << "}\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Validation

namespace {

struct Interval {
  std::int64_t lo;
  std::int64_t hi;
};

std::optional<Interval> interval_of(const Expr& e, const std::vector<Interval>& env) {
  switch (e.op) {
    case ExprOp::Int: return Interval{e.value, e.value};
    case ExprOp::Var: return env[static_cast<std::size_t>(e.index)];
    case ExprOp::Neg: {
      auto a = interval_of(*e.args[0], env);
      if (!a) return std::nullopt;
      return Interval{-a->hi, -a->lo};
    }
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul: {
      auto a = interval_of(*e.args[0], env);
      auto b = interval_of(*e.args[1], env);
      if (!a || !b) return std::nullopt;
      if (e.op == ExprOp::Add) return Interval{a->lo + b->lo, a->hi + b->hi};
      if (e.op == ExprOp::Sub) return Interval{a->lo - b->hi, a->hi - b->lo};
      const std::int64_t c[4] = {a->lo * b->lo, a->lo * b->hi, a->hi * b->lo, a->hi * b->hi};
      return Interval{*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
    }
    default:
      return std::nullopt;
  }
}

void narrow(const Expr& atom, std::vector<Interval>& env) {
  if (!is_comparison(atom.op)) return;
  const Expr* lhs = atom.args[0].get();
  const Expr* rhs = atom.args[1].get();
  ExprOp op = atom.op;
  if (lhs->op != ExprOp::Var) {
    std::swap(lhs, rhs);
    op = flip_comparison(op);
  }
  if (lhs->op != ExprOp::Var) return;
  auto k = fold_constant(*rhs);
  if (!k) return;
  Interval& iv = env[static_cast<std::size_t>(lhs->index)];
  switch (op) {
    case ExprOp::Lt: iv.hi = std::min(iv.hi, *k - 1); break;
    case ExprOp::Le: iv.hi = std::min(iv.hi, *k); break;
    case ExprOp::Eq: iv.lo = std::max(iv.lo, *k); iv.hi = std::min(iv.hi, *k); break;
    case ExprOp::Ge: iv.lo = std::max(iv.lo, *k); break;
    case ExprOp::Gt: iv.lo = std::max(iv.lo, *k + 1); break;
    default: break;
  }
}

}  // namespace

std::vector<Diagnostic> validate(const Network& net) {
  std::vector<Diagnostic> out;
  for (const auto& v : net.variables) {
    if (v.min > v.max)
      out.push_back({"VAR_DOMAIN", "variable '" + v.name + "' has an empty domain", {}, v.name});
    else if (v.init < v.min || v.init > v.max)
      out.push_back({"VAR_INIT_RANGE", "initial value of '" + v.name + "' lies outside its domain", {}, v.name});
  }
  std::vector<Interval> domain;
  for (const auto& v : net.variables) domain.push_back({v.min, v.max});

  for (std::size_t a = 0; a < net.automata.size(); ++a) {
    const Automaton& aut = net.automata[a];
    if (aut.locations.empty()) {
      out.push_back({"NO_LOCATIONS", "process '" + aut.name + "' has no locations", {}, aut.name});
      continue;
    }
    auto check_diff = [&](const ClockConstraint& c, const std::string& where, SourcePos pos) {
      if (c.other != 0 && c.other == c.clock)
        out.push_back({"DIFF_SAME_CLOCK", "difference constraint on a single clock", pos, where});
    };
    for (const auto& loc : aut.locations) {
      const std::string where = aut.name + "." + loc.name;
      for (const auto& c : loc.invariant) {
        if (c.rel != Rel::Lt && c.rel != Rel::Le)
          out.push_back({"INV_NOT_UPPER",
                         "invariant atom '" + render_constraint(net, c, static_cast<int>(a)) + "' is not an upper bound",
                         loc.pos, where});
        check_diff(c, where, loc.pos);
      }
      if (loc.delay.kind == Delay::Kind::Fixed && loc.delay.fixed < 0)
        out.push_back({"FIXED_NEGATIVE", "fixed delay is negative", loc.pos, where});
      if (loc.delay.kind == Delay::Kind::Empirical && !net.distributions.count(loc.delay.distribution))
        out.push_back({"DIST_UNRESOLVED", "unknown distribution '" + loc.delay.distribution + "'", loc.pos, where});
      if (loc.rate && !(*loc.rate > 0))
        out.push_back({"RATE_INVALID", "exponential rate must be positive", loc.pos, where});
    }
    for (const auto& e : aut.edges) {
      const std::string where = aut.name + "." + aut.locations[static_cast<std::size_t>(e.source)].name + "->" +
                                aut.locations[static_cast<std::size_t>(e.target)].name;
      for (const auto& c : e.clock_guard) check_diff(c, where, e.pos);
      if (e.sync.kind == SyncKind::Emit) {
        bool paired = false;
        for (std::size_t b = 0; b < net.automata.size() && !paired; ++b) {
          if (b == a) continue;
          for (const auto& f : net.automata[b].edges)
            if (f.sync.kind == SyncKind::Receive && f.sync.channel == e.sync.channel) {
              paired = true;
              break;
            }
        }
        if (!paired)
          out.push_back({"CHAN_UNPAIRED",
                         "channel '" + net.channels[static_cast<std::size_t>(e.sync.channel)] +
                             "' is emitted but never received by another process",
                         e.pos, where});
      }
      if (!e.updates.empty()) {
        auto env = domain;
        for (const auto& g : e.data_guard) narrow(*g, env);
        for (const auto& u : e.updates) {
          const Variable& v = net.variables[static_cast<std::size_t>(u.var)];
          auto iv = interval_of(*u.value, env);
          if (iv && (iv->lo < v.min || iv->hi > v.max))
            out.push_back({"UPDATE_RANGE",
                           "update '" + v.name + " = " + render(*u.value) + "' can leave [" + std::to_string(v.min) +
                               "," + std::to_string(v.max) + "]",
                           e.pos, where});
          env[static_cast<std::size_t>(u.var)] = iv ? *iv : Interval{v.min, v.max};
        }
      }
    }
  }
  return out;
}

Network to_approximate(const Network& net) {
  Network out = net;
  for (auto& aut : out.automata) {
    for (auto& loc : aut.locations) {
      if (loc.delay.kind != Delay::Kind::Empirical) continue;
      auto it = net.distributions.find(loc.delay.distribution);
      if (it == net.distributions.end())
        throw ModelError("location '" + aut.name + "." + loc.name + "' references unknown distribution '" +
                         loc.delay.distribution + "'");
      loc.delay = Delay::fixed_ms(weighted_average(it->second));
    }
  }
  out.finalize();
  return out;
}

bool structurally_equal(const Network& a, const Network& b) {
  auto same_guard = [](const std::vector<ExprPtr>& x, const std::vector<ExprPtr>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!same(x[i], y[i])) return false;
    return true;
  };
  if (a.channels != b.channels || a.distributions != b.distributions ||
      a.distribution_files != b.distribution_files || a.max_constant != b.max_constant ||
      a.automata.size() != b.automata.size() || a.clocks.size() != b.clocks.size() ||
      a.variables.size() != b.variables.size())
    return false;
  for (std::size_t i = 0; i < a.clocks.size(); ++i)
    if (a.clocks[i].name != b.clocks[i].name || a.clocks[i].owner != b.clocks[i].owner ||
        a.clocks[i].local != b.clocks[i].local)
      return false;
  for (std::size_t i = 0; i < a.variables.size(); ++i) {
    const auto& x = a.variables[i];
    const auto& y = b.variables[i];
    if (x.name != y.name || x.min != y.min || x.max != y.max || x.init != y.init) return false;
  }
  for (std::size_t i = 0; i < a.automata.size(); ++i) {
    const Automaton& x = a.automata[i];
    const Automaton& y = b.automata[i];
    if (x.name != y.name || x.initial != y.initial || x.sojourn_clock != y.sojourn_clock ||
        x.locations.size() != y.locations.size() || x.edges.size() != y.edges.size())
      return false;
    for (std::size_t l = 0; l < x.locations.size(); ++l) {
      const auto& p = x.locations[l];
      const auto& q = y.locations[l];
      if (p.name != q.name || p.invariant != q.invariant || p.delay != q.delay || p.rate != q.rate) return false;
    }
    for (std::size_t e = 0; e < x.edges.size(); ++e) {
      const auto& p = x.edges[e];
      const auto& q = y.edges[e];
      if (p.source != q.source || p.target != q.target || p.clock_guard != q.clock_guard ||
          !same_guard(p.data_guard, q.data_guard) || p.sync != q.sync || p.resets != q.resets ||
          p.updates.size() != q.updates.size())
        return false;
      for (std::size_t u = 0; u < p.updates.size(); ++u)
        if (p.updates[u].var != q.updates[u].var || !same(p.updates[u].value, q.updates[u].value)) return false;
    }
  }
  return true;
}

}  // namespace twinverify
