#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twinverify/lexer.hpp"

namespace twinverify {

/// Node kinds of the shared expression language used by guards, updates,
/// invariants and query predicates. `Name` nodes are unresolved references;
/// binding turns them into `Var`, `Clock`, `Location` or `Channel`.
enum class ExprOp : std::uint8_t {
  Int,
  Bool,
  Name,
  Var,
  Clock,
  Location,
  Channel,
  Not,
  Neg,
  Mul,
  Div,
  Mod,
  Add,
  Sub,
  Lt,
  Le,
  Eq,
  Ne,
  Ge,
  Gt,
  And,
  Or,
  Imply,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprOp op = ExprOp::Int;
  std::int64_t value = 0;
  std::string qualifier;  // `Proc` in `Proc.Loc`, empty otherwise
  std::string name;
  int index = -1;  // var / clock / channel / automaton index once bound
  int sub = -1;    // location index within the automaton
  std::vector<ExprPtr> args;
  SourcePos pos;
};

ExprPtr make_int(std::int64_t v, SourcePos pos = {});
ExprPtr make_bool(bool v, SourcePos pos = {});
ExprPtr make_unary(ExprOp op, ExprPtr a, SourcePos pos = {});
ExprPtr make_binary(ExprOp op, ExprPtr a, ExprPtr b, SourcePos pos = {});
ExprPtr make_name(std::string qualifier, std::string name, SourcePos pos = {});

bool is_comparison(ExprOp op);
bool is_logical(ExprOp op);
/// Negation of a comparison operator (`<` becomes `>=`, ...).
ExprOp negate_comparison(ExprOp op);
/// Mirror of a comparison operator when its operands swap sides.
ExprOp flip_comparison(ExprOp op);

/// Parses a full expression. Precedence, loosest first:
/// imply, or, and, comparisons, not, additive, multiplicative, unary minus.
ExprPtr parse_expr(TokenStream& ts);

std::string render(const Expr& e);
inline std::string render(const ExprPtr& e) { return e ? render(*e) : std::string(); }

/// Structural equality ignoring source positions and bound indices.
bool same(const Expr& a, const Expr& b);
bool same(const ExprPtr& a, const ExprPtr& b);

bool mentions(const Expr& e, ExprOp kind);
bool has_clock(const Expr& e);

/// Resolution callback: given an unresolved name node, return the bound
/// replacement or nullopt when the identifier is unknown.
using NameResolver = std::function<std::optional<ExprPtr>(const Expr& name)>;

/// Rebuilds `e` with every `Name` node resolved. Unknown identifiers are
/// appended to `diags` with code UNDECLARED and left unresolved.
ExprPtr resolve(const ExprPtr& e, const NameResolver& resolver, std::vector<Diagnostic>& diags);

/// Folds an integer constant expression (literals and arithmetic only).
std::optional<std::int64_t> fold_constant(const Expr& e);

struct EvalContext {
  std::span<const int> locations;
  std::span<const std::int64_t> vars;
  std::span<const double> clocks;  // indexed by clock id; slot 0 is the reference clock
  int event_channel = -1;          // channel of the event that produced this state
};

class EvalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::int64_t eval_int(const Expr& e, const EvalContext& ctx);
double eval_real(const Expr& e, const EvalContext& ctx);
inline bool eval_bool(const Expr& e, const EvalContext& ctx) { return eval_int(e, ctx) != 0; }

/// Visits every comparison node whose operands mention a clock.
void for_each_clock_comparison(const Expr& e, const std::function<void(const Expr&)>& fn);

/// Splits a top-level conjunction into its conjuncts.
std::vector<ExprPtr> conjuncts(const ExprPtr& e);

}  // namespace twinverify
