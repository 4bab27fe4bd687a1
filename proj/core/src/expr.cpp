#include "twinverify/expr.hpp"

#include <cmath>
#include <limits>

namespace twinverify {

ExprPtr make_int(std::int64_t v, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Int;
  e->value = v;
  e->pos = pos;
  return e;
}

ExprPtr make_bool(bool v, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Bool;
  e->value = v ? 1 : 0;
  e->pos = pos;
  return e;
}

ExprPtr make_unary(ExprOp op, ExprPtr a, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->args = {std::move(a)};
  e->pos = pos;
  return e;
}

ExprPtr make_binary(ExprOp op, ExprPtr a, ExprPtr b, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->args = {std::move(a), std::move(b)};
  e->pos = pos;
  return e;
}

ExprPtr make_name(std::string qualifier, std::string name, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Name;
  e->qualifier = std::move(qualifier);
  e->name = std::move(name);
  e->pos = pos;
  return e;
}

bool is_comparison(ExprOp op) {
  switch (op) {
    case ExprOp::Lt:
    case ExprOp::Le:
    case ExprOp::Eq:
    case ExprOp::Ne:
    case ExprOp::Ge:
    case ExprOp::Gt:
      return true;
    default:
      return false;
  }
}

bool is_logical(ExprOp op) {
  return op == ExprOp::And || op == ExprOp::Or || op == ExprOp::Imply || op == ExprOp::Not;
}

ExprOp negate_comparison(ExprOp op) {
  switch (op) {
    case ExprOp::Lt: return ExprOp::Ge;
    case ExprOp::Le: return ExprOp::Gt;
    case ExprOp::Eq: return ExprOp::Ne;
    case ExprOp::Ne: return ExprOp::Eq;
    case ExprOp::Ge: return ExprOp::Lt;
    case ExprOp::Gt: return ExprOp::Le;
    default: return op;
  }
}

ExprOp flip_comparison(ExprOp op) {
  switch (op) {
    case ExprOp::Lt: return ExprOp::Gt;
    case ExprOp::Le: return ExprOp::Ge;
    case ExprOp::Ge: return ExprOp::Le;
    case ExprOp::Gt: return ExprOp::Lt;
    default: return op;
  }
}

namespace {

bool is_keyword(const Token& t) {
  return t.is_ident("not") || t.is_ident("and") || t.is_ident("or") || t.is_ident("imply") ||
         t.is_ident("true") || t.is_ident("false");
}

ExprPtr parse_imply(TokenStream& ts);

ExprPtr parse_primary(TokenStream& ts) {
  const Token& t = ts.peek();
  if (t.kind == TokenKind::Int) {
    ts.next();
    try {
      return make_int(std::stoll(t.text), t.pos);
    } catch (const std::out_of_range&) {
      throw ParseError({{"SYNTAX", "integer literal out of range", t.pos, t.text}});
    }
  }
  if (t.is_ident("true") || t.is_ident("false")) {
    ts.next();
    return make_bool(t.text == "true", t.pos);
  }
  if (t.is("(")) {
    ts.next();
    auto e = parse_imply(ts);
    ts.expect(")");
    return e;
  }
  if (t.kind == TokenKind::Ident && !is_keyword(t)) {
    ts.next();
    if (ts.peek().is(".") && ts.peek(1).kind == TokenKind::Ident) {
      ts.next();
      const Token& member = ts.next();
      return make_name(t.text, member.text, t.pos);
    }
    return make_name("", t.text, t.pos);
  }
  ts.fail(t, "expression");
}

ExprPtr parse_unary(TokenStream& ts) {
  const Token& t = ts.peek();
  if (t.is("-")) {
    ts.next();
    if (ts.peek().kind == TokenKind::Int) {
      const Token& lit = ts.next();
      try {
        return make_int(-std::stoll(lit.text), t.pos);
      } catch (const std::out_of_range&) {
        throw ParseError({{"SYNTAX", "integer literal out of range", lit.pos, lit.text}});
      }
    }
    return make_unary(ExprOp::Neg, parse_unary(ts), t.pos);
  }
  return parse_primary(ts);
}

ExprPtr parse_mul(TokenStream& ts) {
  auto lhs = parse_unary(ts);
  for (;;) {
    const Token& t = ts.peek();
    ExprOp op;
    if (t.is("*")) op = ExprOp::Mul;
    else if (t.is("/")) op = ExprOp::Div;
    else if (t.is("%")) op = ExprOp::Mod;
    else return lhs;
    ts.next();
    lhs = make_binary(op, lhs, parse_unary(ts), t.pos);
  }
}

ExprPtr parse_add(TokenStream& ts) {
  auto lhs = parse_mul(ts);
  for (;;) {
    const Token& t = ts.peek();
    ExprOp op;
    if (t.is("+")) op = ExprOp::Add;
    else if (t.is("-")) op = ExprOp::Sub;
    else return lhs;
    ts.next();
    lhs = make_binary(op, lhs, parse_mul(ts), t.pos);
  }
}

ExprPtr parse_not(TokenStream& ts) {
  const Token& t = ts.peek();
  if (t.is_ident("not") || t.is("!")) {
    ts.next();
    return make_unary(ExprOp::Not, parse_not(ts), t.pos);
  }
  return parse_add(ts);
}

ExprPtr parse_cmp(TokenStream& ts) {
  auto lhs = parse_not(ts);
  const Token& t = ts.peek();
  ExprOp op;
  if (t.is("<")) op = ExprOp::Lt;
  else if (t.is("<=")) op = ExprOp::Le;
  else if (t.is("==")) op = ExprOp::Eq;
  else if (t.is("!=")) op = ExprOp::Ne;
  else if (t.is(">=")) op = ExprOp::Ge;
  else if (t.is(">")) op = ExprOp::Gt;
  else return lhs;
  ts.next();
  return make_binary(op, lhs, parse_not(ts), t.pos);
}

ExprPtr parse_and(TokenStream& ts) {
  auto lhs = parse_cmp(ts);
  for (;;) {
    const Token& t = ts.peek();
    if (!(t.is_ident("and") || t.is("&&"))) return lhs;
    ts.next();
    lhs = make_binary(ExprOp::And, lhs, parse_cmp(ts), t.pos);
  }
}

ExprPtr parse_or(TokenStream& ts) {
  auto lhs = parse_and(ts);
  for (;;) {
    const Token& t = ts.peek();
    if (!(t.is_ident("or") || t.is("||"))) return lhs;
    ts.next();
    lhs = make_binary(ExprOp::Or, lhs, parse_and(ts), t.pos);
  }
}

ExprPtr parse_imply(TokenStream& ts) {
  auto lhs = parse_or(ts);
  const Token& t = ts.peek();
  if (t.is_ident("imply")) {
    ts.next();
    return make_binary(ExprOp::Imply, lhs, parse_imply(ts), t.pos);
  }
  return lhs;
}

int precedence(const Expr& e) {
  switch (e.op) {
    case ExprOp::Imply: return 1;
    case ExprOp::Or: return 2;
    case ExprOp::And: return 3;
    case ExprOp::Lt:
    case ExprOp::Le:
    case ExprOp::Eq:
    case ExprOp::Ne:
    case ExprOp::Ge:
    case ExprOp::Gt: return 4;
    case ExprOp::Not: return 5;
    case ExprOp::Add:
    case ExprOp::Sub: return 6;
    case ExprOp::Mul:
    case ExprOp::Div:
    case ExprOp::Mod: return 7;
    case ExprOp::Neg: return 8;
    case ExprOp::Int: return e.value < 0 ? 8 : 9;
    default: return 9;
  }
}

const char* op_text(ExprOp op) {
  switch (op) {
    case ExprOp::Imply: return " imply ";
    case ExprOp::Or: return " || ";
    case ExprOp::And: return " && ";
    case ExprOp::Lt: return " < ";
    case ExprOp::Le: return " <= ";
    case ExprOp::Eq: return " == ";
    case ExprOp::Ne: return " != ";
    case ExprOp::Ge: return " >= ";
    case ExprOp::Gt: return " > ";
    case ExprOp::Add: return " + ";
    case ExprOp::Sub: return " - ";
    case ExprOp::Mul: return " * ";
    case ExprOp::Div: return " / ";
    case ExprOp::Mod: return " % ";
    default: return " ? ";
  }
}

std::string wrap(const Expr& child, bool paren) {
  return paren ? "(" + render(child) + ")" : render(child);
}

}  // namespace

ExprPtr parse_expr(TokenStream& ts) { return parse_imply(ts); }

std::string render(const Expr& e) {
  switch (e.op) {
    case ExprOp::Int: return std::to_string(e.value);
    case ExprOp::Bool: return e.value ? "true" : "false";
    case ExprOp::Name:
    case ExprOp::Var:
    case ExprOp::Clock:
    case ExprOp::Location:
    case ExprOp::Channel:
      return e.qualifier.empty() ? e.name : e.qualifier + "." + e.name;
    case ExprOp::Not: {
      const Expr& a = *e.args[0];
      return "not " + wrap(a, precedence(a) < 5);
    }
    case ExprOp::Neg: {
      const Expr& a = *e.args[0];
      return "-" + wrap(a, precedence(a) < 9 || a.op == ExprOp::Int);
    }
    default: break;
  }
  const Expr& a = *e.args[0];
  const Expr& b = *e.args[1];
  const int p = precedence(e);
  bool pa = false;
  bool pb = false;
  if (e.op == ExprOp::Imply) {
    pa = precedence(a) <= p;
    pb = precedence(b) < p;
  } else if (is_comparison(e.op)) {
    pa = precedence(a) <= p;
    pb = precedence(b) <= p;
  } else {
    pa = precedence(a) < p;
    pb = precedence(b) <= p;
  }
  return wrap(a, pa) + op_text(e.op) + wrap(b, pb);
}

bool same(const Expr& a, const Expr& b) {
  if (a.op != b.op || a.value != b.value || a.qualifier != b.qualifier || a.name != b.name ||
      a.args.size() != b.args.size())
    return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!same(*a.args[i], *b.args[i])) return false;
  return true;
}

bool same(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return same(*a, *b);
}

bool mentions(const Expr& e, ExprOp kind) {
  if (e.op == kind) return true;
  for (const auto& a : e.args)
    if (mentions(*a, kind)) return true;
  return false;
}

bool has_clock(const Expr& e) { return mentions(e, ExprOp::Clock); }

ExprPtr resolve(const ExprPtr& e, const NameResolver& resolver, std::vector<Diagnostic>& diags) {
  if (e->op == ExprOp::Name) {
    if (auto r = resolver(*e)) return *r;
    diags.push_back({"UNDECLARED", "undeclared identifier '" + render(*e) + "'", e->pos, render(*e)});
    return e;
  }
  if (e->args.empty()) return e;
  auto copy = std::make_shared<Expr>(*e);
  for (auto& a : copy->args) a = resolve(a, resolver, diags);
  return copy;
}

std::optional<std::int64_t> fold_constant(const Expr& e) {
  switch (e.op) {
    case ExprOp::Int: return e.value;
    case ExprOp::Neg: {
      auto a = fold_constant(*e.args[0]);
      if (!a) return std::nullopt;
      return -*a;
    }
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul: {
      auto a = fold_constant(*e.args[0]);
      auto b = fold_constant(*e.args[1]);
      if (!a || !b) return std::nullopt;
      if (e.op == ExprOp::Add) return *a + *b;
      if (e.op == ExprOp::Sub) return *a - *b;
      return *a * *b;
    }
    default:
      return std::nullopt;
  }
}

namespace {

bool compare(ExprOp op, double a, double b) {
  switch (op) {
    case ExprOp::Lt: return a < b;
    case ExprOp::Le: return a <= b;
    case ExprOp::Eq: return a == b;
    case ExprOp::Ne: return a != b;
    case ExprOp::Ge: return a >= b;
    case ExprOp::Gt: return a > b;
    default: return false;
  }
}

int location_of(const Expr& e, const EvalContext& ctx) {
  if (e.index < 0 || static_cast<std::size_t>(e.index) >= ctx.locations.size())
    throw EvalError("location test '" + render(e) + "' is not bound");
  return ctx.locations[static_cast<std::size_t>(e.index)];
}

}  // namespace

std::int64_t eval_int(const Expr& e, const EvalContext& ctx) {
  switch (e.op) {
    case ExprOp::Int:
    case ExprOp::Bool:
      return e.value;
    case ExprOp::Var:
      if (e.index < 0 || static_cast<std::size_t>(e.index) >= ctx.vars.size())
        throw EvalError("variable '" + render(e) + "' is not bound");
      return ctx.vars[static_cast<std::size_t>(e.index)];
    case ExprOp::Location:
      return location_of(e, ctx) == e.sub ? 1 : 0;
    case ExprOp::Channel:
      return ctx.event_channel == e.index ? 1 : 0;
    case ExprOp::Clock:
      throw EvalError("clock '" + render(e) + "' used in an integer context");
    case ExprOp::Name:
      throw EvalError("unresolved identifier '" + render(e) + "'");
    case ExprOp::Not: return eval_int(*e.args[0], ctx) == 0 ? 1 : 0;
    case ExprOp::Neg: return -eval_int(*e.args[0], ctx);
    case ExprOp::And: return (eval_int(*e.args[0], ctx) != 0 && eval_int(*e.args[1], ctx) != 0) ? 1 : 0;
    case ExprOp::Or: return (eval_int(*e.args[0], ctx) != 0 || eval_int(*e.args[1], ctx) != 0) ? 1 : 0;
    case ExprOp::Imply: return (eval_int(*e.args[0], ctx) == 0 || eval_int(*e.args[1], ctx) != 0) ? 1 : 0;
    default: break;
  }
  const std::int64_t a = eval_int(*e.args[0], ctx);
  const std::int64_t b = eval_int(*e.args[1], ctx);
  switch (e.op) {
    case ExprOp::Add: return a + b;
    case ExprOp::Sub: return a - b;
    case ExprOp::Mul: return a * b;
    case ExprOp::Div:
      if (b == 0) throw EvalError("division by zero in '" + render(e) + "'");
      return a / b;
    case ExprOp::Mod:
      if (b == 0) throw EvalError("division by zero in '" + render(e) + "'");
      return a % b;
    default:
      return compare(e.op, static_cast<double>(a), static_cast<double>(b)) ? 1 : 0;
  }
}

double eval_real(const Expr& e, const EvalContext& ctx) {
  if (!has_clock(e)) return static_cast<double>(eval_int(e, ctx));
  switch (e.op) {
    case ExprOp::Clock:
      if (e.index < 0 || static_cast<std::size_t>(e.index) >= ctx.clocks.size())
        throw EvalError("clock '" + render(e) + "' has no value here");
      return ctx.clocks[static_cast<std::size_t>(e.index)];
    case ExprOp::Not: return eval_real(*e.args[0], ctx) == 0.0 ? 1.0 : 0.0;
    case ExprOp::Neg: return -eval_real(*e.args[0], ctx);
    case ExprOp::And:
      return (eval_real(*e.args[0], ctx) != 0.0 && eval_real(*e.args[1], ctx) != 0.0) ? 1.0 : 0.0;
    case ExprOp::Or:
      return (eval_real(*e.args[0], ctx) != 0.0 || eval_real(*e.args[1], ctx) != 0.0) ? 1.0 : 0.0;
    case ExprOp::Imply:
      return (eval_real(*e.args[0], ctx) == 0.0 || eval_real(*e.args[1], ctx) != 0.0) ? 1.0 : 0.0;
    default: break;
  }
  const double a = eval_real(*e.args[0], ctx);
  const double b = eval_real(*e.args[1], ctx);
  switch (e.op) {
    case ExprOp::Add: return a + b;
    case ExprOp::Sub: return a - b;
    case ExprOp::Mul: return a * b;
    case ExprOp::Div:
      if (b == 0.0) throw EvalError("division by zero in '" + render(e) + "'");
      return a / b;
    case ExprOp::Mod:
      if (b == 0.0) throw EvalError("division by zero in '" + render(e) + "'");
      return std::fmod(a, b);
    default:
      return compare(e.op, a, b) ? 1.0 : 0.0;
  }
}

void for_each_clock_comparison(const Expr& e, const std::function<void(const Expr&)>& fn) {
  if (is_comparison(e.op) && has_clock(e)) {
    fn(e);
    return;
  }
  for (const auto& a : e.args) for_each_clock_comparison(*a, fn);
}

std::vector<ExprPtr> conjuncts(const ExprPtr& e) {
  std::vector<ExprPtr> out;
  std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& x) {
    if (x->op == ExprOp::And) {
      walk(x->args[0]);
      walk(x->args[1]);
    } else {
      out.push_back(x);
    }
  };
  walk(e);
  return out;
}

}  // namespace twinverify
