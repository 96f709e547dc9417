#include <algorithm>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "aflow/syntax.hpp"

#include "lexer.hpp"

namespace aflow {

namespace {

using detail::Cursor;
using detail::TokKind;
using detail::Token;

struct NodeDecl {
  std::string id;
  std::string type_name;
  ParamMap params;
  SourceSpan span;
};

struct SetDecl {
  std::string node;
  std::string param;
  ParamValue value;
  SourceSpan span;
};

struct EdgeDecl {
  std::string src_node, src_port, dst_node, dst_port;
  SourceSpan span;
};

struct Program {
  std::vector<NodeDecl> nodes;
  std::vector<SetDecl> sets;
  std::vector<EdgeDecl> edges;
  std::vector<Diagnostic> diagnostics;

  void invalid(SourceSpan at, std::string msg) {
    diagnostics.push_back(Diagnostic{ErrorCategory::InvalidFormat, Severity::Error,
                                     Location::at_span(at), std::move(msg)});
  }
  void dangling(SourceSpan at, std::string msg) {
    diagnostics.push_back(Diagnostic{ErrorCategory::ConnectionError, Severity::Error,
                                     Location::at_span(at), std::move(msg)});
  }
};

std::optional<ParamValue> token_literal(const Token& t, Program& prog) {
  switch (t.kind) {
    case TokKind::String:
      return ParamValue(t.text);
    case TokKind::Integer:
      try {
        return ParamValue(static_cast<std::int64_t>(std::stoll(t.text)));
      } catch (const std::exception&) {
        prog.invalid(t.span, "integer literal '" + t.text + "' out of range");
        return std::nullopt;
      }
    case TokKind::Real:
      try {
        double d = std::stod(t.text);
        return ParamValue(d);  // throws InvalidValue on overflow to inf
      } catch (const std::exception&) {
        prog.invalid(t.span, "real literal '" + t.text + "' out of range");
        return std::nullopt;
      }
    case TokKind::Ident:
      if (t.text == "true") return ParamValue(true);
      if (t.text == "false") return ParamValue(false);
      [[fallthrough]];
    default:
      prog.invalid(t.span, "expected a literal value, found '" + t.text + "'");
      return std::nullopt;
  }
}

// Applies collected declarations in three passes (nodes, parameter sets,
// edges) so statement order never matters outside the dataflow style.
// Dangling references and occupied inputs are reported as ConnectionError
// and dropped; any InvalidFormat error suppresses the workflow value.
ParseOutcome build_program(Program prog) {
  ParseOutcome out;
  Workflow w;

  for (auto& decl : prog.nodes) {
    if (w.has_node(decl.id)) {
      prog.invalid(decl.span, "duplicate node id '" + decl.id + "'");
      continue;
    }
    out.node_spans[decl.id] = decl.span;
    w.add_node(std::move(decl.id), std::move(decl.type_name), std::move(decl.params));
  }

  for (auto& set : prog.sets) {
    NodeInstance* node = w.find_node(set.node);
    if (!node) {
      prog.dangling(set.span, "'set' references undeclared node '" + set.node + "'");
      continue;
    }
    bool replaced = false;
    for (auto& [k, v] : node->params) {
      if (k == set.param) {
        v = set.value;
        replaced = true;
        break;
      }
    }
    if (!replaced) node->params.emplace_back(std::move(set.param), std::move(set.value));
  }

  for (const auto& e : prog.edges) {
    if (!w.has_node(e.src_node)) {
      prog.dangling(e.span, "edge references undeclared node '" + e.src_node + "'");
      continue;
    }
    if (!w.has_node(e.dst_node)) {
      prog.dangling(e.span, "edge references undeclared node '" + e.dst_node + "'");
      continue;
    }
    if (w.edge_into(e.dst_node, e.dst_port)) {
      prog.dangling(e.span,
                    "input '" + e.dst_node + "." + e.dst_port + "' already receives a flow");
      continue;
    }
    w.connect(e.src_node, e.src_port, e.dst_node, e.dst_port);
    out.edge_spans.push_back(e.span);
  }

  out.diagnostics = std::move(prog.diagnostics);
  bool malformed = std::any_of(out.diagnostics.begin(), out.diagnostics.end(), [](const auto& d) {
    return d.category == ErrorCategory::InvalidFormat && d.severity == Severity::Error;
  });
  if (!malformed) out.workflow = std::move(w);
  return out;
}

// ---------------------------------------------------------------------------
// Declarative style:
//   workflow { node <id> = <Type>(<k>=<v>, ...); ... <a>.<p> -> <b>.<q>; ... }

class DeclarativeParser {
 public:
  explicit DeclarativeParser(const std::vector<Token>& tokens) : c_(tokens) {}

  Program run() {
    if (!c_.peek().is_ident("workflow")) {
      prog_.invalid(c_.peek().span, "expected 'workflow' header");
      return std::move(prog_);
    }
    c_.next();
    if (!c_.peek().is_punct("{")) {
      prog_.invalid(c_.peek().span, "expected '{' after 'workflow'");
      return std::move(prog_);
    }
    c_.next();

    bool closed = false;
    while (!c_.at_end()) {
      if (c_.peek().is_punct("}")) {
        c_.next();
        closed = true;
        break;
      }
      bool node_decl = c_.peek().is_ident("node") && c_.peek(1).kind == TokKind::Ident;
      bool ok = node_decl ? parse_node() : parse_edge();
      if (!ok) recover();
    }
    if (!closed) {
      prog_.invalid(c_.peek().span, "missing closing '}'");
    } else if (!c_.at_end()) {
      prog_.invalid(c_.peek().span, "unexpected content after '}'");
    }
    return std::move(prog_);
  }

 private:
  bool expect_punct(std::string_view p) {
    if (!c_.peek().is_punct(p)) {
      prog_.invalid(c_.peek().span,
                    "expected '" + std::string(p) + "', found '" + c_.peek().text + "'");
      return false;
    }
    c_.next();
    return true;
  }

  std::optional<Token> expect_ident(std::string_view what) {
    if (c_.peek().kind != TokKind::Ident) {
      prog_.invalid(c_.peek().span,
                    "expected " + std::string(what) + ", found '" + c_.peek().text + "'");
      return std::nullopt;
    }
    return c_.next();
  }

  bool parse_node() {
    SourceSpan at = c_.peek().span;
    c_.next();  // 'node'
    auto id = expect_ident("node id");
    if (!id || !expect_punct("=")) return false;
    auto type = expect_ident("type name");
    if (!type || !expect_punct("(")) return false;

    ParamMap params;
    if (!c_.peek().is_punct(")")) {
      while (true) {
        auto key = expect_ident("parameter name");
        if (!key || !expect_punct("=")) return false;
        auto value = token_literal(c_.next(), prog_);
        if (!value) return false;
        if (find_param(params, key->text)) {
          prog_.invalid(key->span, "duplicate parameter '" + key->text + "'");
          return false;
        }
        params.emplace_back(key->text, std::move(*value));
        if (c_.peek().is_punct(",")) {
          c_.next();
          continue;
        }
        break;
      }
    }
    if (!expect_punct(")") || !expect_punct(";")) return false;
    prog_.nodes.push_back(NodeDecl{id->text, type->text, std::move(params), at});
    return true;
  }

  bool parse_edge() {
    SourceSpan at = c_.peek().span;
    auto src = expect_ident("node id");
    if (!src || !expect_punct(".")) return false;
    auto sport = expect_ident("output port");
    if (!sport || !expect_punct("->")) return false;
    auto dst = expect_ident("node id");
    if (!dst || !expect_punct(".")) return false;
    auto dport = expect_ident("input port");
    if (!dport || !expect_punct(";")) return false;
    prog_.edges.push_back(EdgeDecl{src->text, sport->text, dst->text, dport->text, at});
    return true;
  }

  void recover() {
    while (!c_.at_end() && !c_.peek().is_punct(";") && !c_.peek().is_punct("}")) c_.next();
    if (c_.peek().is_punct(";")) c_.next();
  }

  Cursor c_;
  Program prog_;
};

// ---------------------------------------------------------------------------
// Dataflow style:
//   <id> = <Type>(<k>=<literal>, <inPort> = <id>.<outPort>, ...);
// Statement order must already be topological: referencing an id before its
// defining statement is an InvalidFormat error, which also makes cycles
// inexpressible.

class DataflowParser {
 public:
  explicit DataflowParser(const std::vector<Token>& tokens) : c_(tokens) {}

  Program run() {
    while (!c_.at_end()) {
      if (!parse_statement()) recover();
    }
    return std::move(prog_);
  }

 private:
  bool expect_punct(std::string_view p) {
    if (!c_.peek().is_punct(p)) {
      prog_.invalid(c_.peek().span,
                    "expected '" + std::string(p) + "', found '" + c_.peek().text + "'");
      return false;
    }
    c_.next();
    return true;
  }

  std::optional<Token> expect_ident(std::string_view what) {
    if (c_.peek().kind != TokKind::Ident) {
      prog_.invalid(c_.peek().span,
                    "expected " + std::string(what) + ", found '" + c_.peek().text + "'");
      return std::nullopt;
    }
    return c_.next();
  }

  bool parse_statement() {
    SourceSpan at = c_.peek().span;
    auto id = expect_ident("node id");
    if (!id || !expect_punct("=")) return false;
    auto type = expect_ident("type name");
    if (!type || !expect_punct("(")) return false;

    ParamMap params;
    std::vector<EdgeDecl> pending;
    std::vector<std::string> arg_names;
    if (!c_.peek().is_punct(")")) {
      while (true) {
        auto key = expect_ident("argument name");
        if (!key || !expect_punct("=")) return false;
        if (std::find(arg_names.begin(), arg_names.end(), key->text) != arg_names.end()) {
          prog_.invalid(key->span, "duplicate argument '" + key->text + "'");
          return false;
        }
        arg_names.push_back(key->text);

        if (c_.peek().kind == TokKind::Ident && c_.peek(1).is_punct(".")) {
          Token src = c_.next();
          c_.next();  // '.'
          auto sport = expect_ident("output port");
          if (!sport) return false;
          if (!declared(src.text)) {
            prog_.invalid(src.span, "use of '" + src.text + "' before definition");
            return false;
          }
          pending.push_back(EdgeDecl{src.text, sport->text, id->text, key->text, src.span});
        } else {
          auto value = token_literal(c_.next(), prog_);
          if (!value) return false;
          params.emplace_back(key->text, std::move(*value));
        }
        if (c_.peek().is_punct(",")) {
          c_.next();
          continue;
        }
        break;
      }
    }
    if (!expect_punct(")") || !expect_punct(";")) return false;

    if (declared(id->text)) {
      prog_.invalid(at, "duplicate node id '" + id->text + "'");
      return false;
    }
    prog_.nodes.push_back(NodeDecl{id->text, type->text, std::move(params), at});
    for (auto& e : pending) prog_.edges.push_back(std::move(e));
    return true;
  }

  bool declared(const std::string& id) const {
    return std::any_of(prog_.nodes.begin(), prog_.nodes.end(),
                       [&](const NodeDecl& n) { return n.id == id; });
  }

  void recover() {
    while (!c_.at_end() && !c_.peek().is_punct(";")) c_.next();
    if (c_.peek().is_punct(";")) c_.next();
  }

  Cursor c_;
  Program prog_;
};

// ---------------------------------------------------------------------------
// Pseudo-natural style: a closed set of fixed-arity verb templates, one
// sentence per statement, '.' terminated. `make`/`set`/`feed` express any
// workflow; the remaining verbs are shorthand for common node kinds of the
// bundled catalog.

class PseudoParser {
 public:
  explicit PseudoParser(const std::vector<Token>& tokens) : c_(tokens) {}

  Program run() {
    while (!c_.at_end()) {
      std::vector<Token> sentence;
      SourceSpan at = c_.peek().span;
      bool terminated = false;
      while (!c_.at_end()) {
        if (c_.peek().is_punct(".")) {
          c_.next();
          terminated = true;
          break;
        }
        sentence.push_back(c_.next());
      }
      if (!terminated) {
        prog_.invalid(at, "missing sentence terminator '.'");
        break;
      }
      if (sentence.empty()) {
        prog_.invalid(at, "empty sentence");
        continue;
      }
      parse_sentence(sentence);
    }
    return std::move(prog_);
  }

 private:
  static bool word(const std::vector<Token>& s, std::size_t i, std::string_view text) {
    return i < s.size() && s[i].is_ident(text);
  }
  static bool ident(const std::vector<Token>& s, std::size_t i) {
    return i < s.size() && s[i].kind == TokKind::Ident;
  }

  void parse_sentence(const std::vector<Token>& s) {
    const SourceSpan at = s[0].span;
    const std::string& verb = s[0].text;
    auto malformed = [&]() {
      prog_.invalid(at, "malformed '" + verb + "' sentence");
    };

    if (s[0].kind != TokKind::Ident) {
      prog_.invalid(at, "expected a verb, found '" + s[0].text + "'");
      return;
    }

    if (verb == "make") {  // make <Type> as <id>
      if (s.size() != 4 || !ident(s, 1) || !word(s, 2, "as") || !ident(s, 3)) return malformed();
      prog_.nodes.push_back(NodeDecl{s[3].text, s[1].text, {}, at});
    } else if (verb == "set") {  // set <id> <param> to <value>
      if (s.size() != 5 || !ident(s, 1) || !ident(s, 2) || !word(s, 3, "to")) return malformed();
      auto value = token_literal(s[4], prog_);
      if (!value) return;
      prog_.sets.push_back(SetDecl{s[1].text, s[2].text, std::move(*value), at});
    } else if (verb == "feed") {  // feed <id> <port> into <id> <port>
      if (s.size() != 6 || !ident(s, 1) || !ident(s, 2) || !word(s, 3, "into") || !ident(s, 4) ||
          !ident(s, 5)) {
        return malformed();
      }
      prog_.edges.push_back(EdgeDecl{s[1].text, s[2].text, s[4].text, s[5].text, at});
    } else if (verb == "connect") {  // connect <id> <port> to <id> <port>
      if (s.size() != 6 || !ident(s, 1) || !ident(s, 2) || !word(s, 3, "to") || !ident(s, 4) ||
          !ident(s, 5)) {
        return malformed();
      }
      prog_.edges.push_back(EdgeDecl{s[1].text, s[2].text, s[4].text, s[5].text, at});
    } else if (verb == "load") {  // load image <"path"> as <id>
      if (s.size() != 5 || !word(s, 1, "image") || s[2].kind != TokKind::String ||
          !word(s, 3, "as") || !ident(s, 4)) {
        return malformed();
      }
      prog_.nodes.push_back(
          NodeDecl{s[4].text, "LoadImage", {{"path", ParamValue(s[2].text)}}, at});
    } else if (verb == "encode") {  // encode <src> into <id>
      if (s.size() != 4 || !ident(s, 1) || !word(s, 2, "into") || !ident(s, 3)) return malformed();
      prog_.nodes.push_back(NodeDecl{s[3].text, "VAEEncode", {}, at});
      prog_.edges.push_back(EdgeDecl{s[1].text, "IMAGE", s[3].text, "pixels", at});
    } else if (verb == "decode") {  // decode <src> into <id>
      if (s.size() != 4 || !ident(s, 1) || !word(s, 2, "into") || !ident(s, 3)) return malformed();
      prog_.nodes.push_back(NodeDecl{s[3].text, "VAEDecode", {}, at});
      prog_.edges.push_back(EdgeDecl{s[1].text, "LATENT", s[3].text, "samples", at});
    } else if (verb == "save") {  // save <src> as <id>
      if (s.size() != 4 || !ident(s, 1) || !word(s, 2, "as") || !ident(s, 3)) return malformed();
      prog_.nodes.push_back(NodeDecl{s[3].text, "SaveImage", {}, at});
      prog_.edges.push_back(EdgeDecl{s[1].text, "IMAGE", s[3].text, "images", at});
    } else if (verb == "blend") {  // blend <a> and <b> into <id>
      if (s.size() != 6 || !ident(s, 1) || !word(s, 2, "and") || !ident(s, 3) ||
          !word(s, 4, "into") || !ident(s, 5)) {
        return malformed();
      }
      prog_.nodes.push_back(NodeDecl{s[5].text, "LatentBlend", {}, at});
      prog_.edges.push_back(EdgeDecl{s[1].text, "LATENT", s[5].text, "samples1", at});
      prog_.edges.push_back(EdgeDecl{s[3].text, "LATENT", s[5].text, "samples2", at});
    } else if (verb == "sample") {  // sample <src> into <id>
      if (s.size() != 4 || !ident(s, 1) || !word(s, 2, "into") || !ident(s, 3)) return malformed();
      prog_.nodes.push_back(NodeDecl{s[3].text, "KSampler", {}, at});
      prog_.edges.push_back(EdgeDecl{s[1].text, "LATENT", s[3].text, "latent_image", at});
    } else {
      prog_.invalid(at, "unrecognized sentence verb '" + verb + "'");
    }
  }

  Cursor c_;
  Program prog_;
};

}  // namespace

ParseOutcome parse(std::string_view text, SyntaxStyle style) {
  detail::LexResult lexed = detail::tokenize(text);
  if (!lexed.ok()) {
    ParseOutcome out;
    out.diagnostics = std::move(lexed.diagnostics);
    return out;
  }
  Program prog;
  switch (style) {
    case SyntaxStyle::declarative:
      prog = DeclarativeParser(lexed.tokens).run();
      break;
    case SyntaxStyle::dataflow:
      prog = DataflowParser(lexed.tokens).run();
      break;
    case SyntaxStyle::pseudo_natural:
      prog = PseudoParser(lexed.tokens).run();
      break;
  }
  return build_program(std::move(prog));
}

}  // namespace aflow
