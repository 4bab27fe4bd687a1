#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace twinverify {

struct SourcePos {
  int line = 1;
  int column = 1;

  friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

std::string to_string(const SourcePos& pos);

/// A positioned, machine-readable problem report. Used both for syntax
/// errors and for structural validation findings.
struct Diagnostic {
  std::string code;
  std::string message;
  SourcePos pos;
  std::string element;
};

std::string to_string(const Diagnostic& d);

/// Thrown by the parsers and binders; carries every diagnostic collected
/// before giving up.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diags_; }

private:
  std::vector<Diagnostic> diags_;
};

enum class TokenKind { End, Newline, Ident, Int, Real, String, Punct };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  SourcePos pos;

  bool is(std::string_view punct) const { return kind == TokenKind::Punct && text == punct; }
  bool is_ident(std::string_view word) const { return kind == TokenKind::Ident && text == word; }
};

/// Tokenizes model and query text. `#` starts a comment running to the end
/// of the line. Newlines are emitted as tokens because the model format is
/// line oriented; the query parser skips them.
std::vector<Token> tokenize(std::string_view text);

const char* describe(TokenKind kind);

/// Cursor over a token vector with the usual expect/accept helpers.
class TokenStream {
public:
  explicit TokenStream(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const;
  const Token& next();
  bool at_end() const { return peek().kind == TokenKind::End; }
  bool accept(std::string_view punct);
  bool accept_ident(std::string_view word);
  const Token& expect(std::string_view punct);
  const Token& expect_kind(TokenKind kind, std::string_view what);
  void skip_newlines();

  [[noreturn]] void fail(const Token& at, const std::string& expected) const;

private:
  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

}  // namespace twinverify
