#include "twinverify/lexer.hpp"

#include <array>
#include <cctype>

namespace twinverify {

std::string to_string(const SourcePos& pos) {
  return std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

std::string to_string(const Diagnostic& d) {
  std::string s = to_string(d.pos) + ": " + d.code + ": " + d.message;
  if (!d.element.empty()) s += " [" + d.element + "]";
  return s;
}

namespace {
std::string join_messages(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += "\n";
    out += to_string(d);
  }
  return out.empty() ? "parse error" : out;
}

// Longest first.
constexpr std::array<std::string_view, 31> kPuncts = {
    "-->", "<=", ">=", "==", "!=", "&&", "||", "->", "<>", "<", ">",
    "=",   "+",  "-",  "*",  "/",  "%",  "(",  ")",  "[",  "]", "{",
    "}",   ",",  ";",  ":",  "!",  "?",  ".",  "^",  "@"};
}  // namespace

ParseError::ParseError(std::vector<Diagnostic> diags)
    : std::runtime_error(join_messages(diags)), diags_(std::move(diags)) {}

const char* describe(TokenKind kind) {
  switch (kind) {
    case TokenKind::End: return "end of input";
    case TokenKind::Newline: return "end of line";
    case TokenKind::Ident: return "identifier";
    case TokenKind::Int: return "integer";
    case TokenKind::Real: return "number";
    case TokenKind::String: return "string";
    case TokenKind::Punct: return "symbol";
  }
  return "token";
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    const SourcePos pos{line, col};
    if (c == '\n') {
      out.push_back({TokenKind::Newline, "\n", pos});
      advance(1);
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      out.push_back({TokenKind::Ident, std::string(text.substr(i, j - i)), pos});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      bool real = false;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j + 1 < text.size() && text[j] == '.' &&
          std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        real = true;
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          real = true;
          j = k;
          while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
      }
      out.push_back({real ? TokenKind::Real : TokenKind::Int,
                     std::string(text.substr(i, j - i)), pos});
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"' && text[j] != '\n') ++j;
      if (j >= text.size() || text[j] != '"')
        throw ParseError({{"SYNTAX", "unterminated string literal", pos, ""}});
      out.push_back({TokenKind::String, std::string(text.substr(i + 1, j - i - 1)), pos});
      advance(j + 1 - i);
      continue;
    }
    bool matched = false;
    for (auto p : kPuncts) {
      if (text.substr(i, p.size()) == p) {
        out.push_back({TokenKind::Punct, std::string(p), pos});
        advance(p.size());
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw ParseError(
          {{"SYNTAX", std::string("unexpected character '") + c + "'", pos, ""}});
    }
  }
  out.push_back({TokenKind::End, "", SourcePos{line, col}});
  return out;
}

const Token& TokenStream::peek(std::size_t ahead) const {
  const std::size_t k = i_ + ahead;
  return k < toks_.size() ? toks_[k] : toks_.back();
}

const Token& TokenStream::next() {
  const Token& t = peek();
  if (i_ < toks_.size() - 1) ++i_;
  return t;
}

bool TokenStream::accept(std::string_view punct) {
  if (peek().is(punct)) {
    next();
    return true;
  }
  return false;
}

bool TokenStream::accept_ident(std::string_view word) {
  if (peek().is_ident(word)) {
    next();
    return true;
  }
  return false;
}

const Token& TokenStream::expect(std::string_view punct) {
  if (!peek().is(punct)) fail(peek(), "'" + std::string(punct) + "'");
  return next();
}

const Token& TokenStream::expect_kind(TokenKind kind, std::string_view what) {
  if (peek().kind != kind) fail(peek(), std::string(what));
  return next();
}

void TokenStream::skip_newlines() {
  while (peek().kind == TokenKind::Newline) next();
}

void TokenStream::fail(const Token& at, const std::string& expected) const {
  std::string got = at.kind == TokenKind::End || at.kind == TokenKind::Newline
                        ? describe(at.kind)
                        : "'" + at.text + "'";
  throw ParseError({{"SYNTAX", "expected " + expected + ", found " + got, at.pos, ""}});
}

}  // namespace twinverify
