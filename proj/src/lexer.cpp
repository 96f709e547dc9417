#include "lexer.hpp"

namespace aflow::detail {

namespace {

bool is_ident_head(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_tail(char c) { return is_ident_head(c) || is_digit(c); }

}  // namespace

LexResult tokenize(std::string_view text) {
  LexResult out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;

  auto here = [&]() { return SourceSpan{line, col}; };
  auto advance = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto complain = [&](SourceSpan at, std::string msg) {
    out.diagnostics.push_back(Diagnostic{ErrorCategory::InvalidFormat, Severity::Error,
                                         Location::at_span(at), std::move(msg)});
  };

  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance();
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance();
      continue;
    }

    SourceSpan start = here();

    if (is_ident_head(c)) {
      std::size_t begin = i;
      while (i < text.size() && is_ident_tail(text[i])) advance();
      out.tokens.push_back(
          Token{TokKind::Ident, std::string(text.substr(begin, i - begin)), start});
      continue;
    }

    if (is_digit(c) || (c == '-' && i + 1 < text.size() && is_digit(text[i + 1]))) {
      std::size_t begin = i;
      bool real = false;
      if (text[i] == '-') advance();
      while (i < text.size() && is_digit(text[i])) advance();
      // A '.' only joins the number when a digit follows; otherwise it is
      // punctuation (pseudo-natural sentence terminator, port separator).
      if (i + 1 < text.size() && text[i] == '.' && is_digit(text[i + 1])) {
        real = true;
        advance();
        while (i < text.size() && is_digit(text[i])) advance();
      }
      if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        std::size_t mark = i;
        std::size_t j = i + 1;
        if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
        if (j < text.size() && is_digit(text[j])) {
          real = true;
          advance(j - i);
          while (i < text.size() && is_digit(text[i])) advance();
        } else {
          i = mark;  // plain identifier follows, e.g. `20eggs`
        }
      }
      out.tokens.push_back(Token{real ? TokKind::Real : TokKind::Integer,
                                 std::string(text.substr(begin, i - begin)), start});
      continue;
    }

    if (c == '"') {
      advance();
      std::string value;
      bool closed = false;
      while (i < text.size()) {
        char d = text[i];
        if (d == '"') {
          advance();
          closed = true;
          break;
        }
        if (d == '\n') break;
        if (d == '\\') {
          if (i + 1 >= text.size()) break;
          char e = text[i + 1];
          switch (e) {
            case '"': value += '"'; break;
            case '\\': value += '\\'; break;
            case 'n': value += '\n'; break;
            case 't': value += '\t'; break;
            case 'r': value += '\r'; break;
            default:
              complain(here(), std::string("unknown escape '\\") + e + "'");
              value += e;
          }
          advance(2);
          continue;
        }
        value += d;
        advance();
      }
      if (!closed) complain(start, "unterminated string literal");
      out.tokens.push_back(Token{TokKind::String, std::move(value), start});
      continue;
    }

    if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      out.tokens.push_back(Token{TokKind::Punct, "->", start});
      advance(2);
      continue;
    }

    if (std::string_view("{}()=,;.").find(c) != std::string_view::npos) {
      out.tokens.push_back(Token{TokKind::Punct, std::string(1, c), start});
      advance();
      continue;
    }

    complain(start, std::string("unexpected character '") + c + "'");
    advance();
  }

  out.tokens.push_back(Token{TokKind::End, "", here()});
  return out;
}

}  // namespace aflow::detail
