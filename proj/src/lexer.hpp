#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "aflow/diagnostics.hpp"

namespace aflow::detail {

enum class TokKind { Ident, String, Integer, Real, Punct, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;  // String tokens hold the decoded value
  SourceSpan span;

  bool is_punct(std::string_view p) const { return kind == TokKind::Punct && text == p; }
  bool is_ident(std::string_view name) const { return kind == TokKind::Ident && text == name; }
};

struct LexResult {
  std::vector<Token> tokens;  // terminated by an End token
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

// Shared lexical layer: identifiers, double-quoted strings with backslash
// escapes, integer and decimal literals, punctuation ({}()=,;. and ->),
// `#` comments to end of line. Never throws; bad input yields InvalidFormat
// diagnostics with positions.
LexResult tokenize(std::string_view text);

// Cursor over a token vector with one-token lookahead.
class Cursor {
 public:
  explicit Cursor(const std::vector<Token>& tokens) : tokens_(&tokens) {}

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < tokens_->size() ? (*tokens_)[i] : tokens_->back();
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ + 1 < tokens_->size()) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == TokKind::End; }

 private:
  const std::vector<Token>* tokens_;
  std::size_t pos_ = 0;
};

}  // namespace aflow::detail
