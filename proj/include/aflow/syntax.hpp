#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aflow/diagnostics.hpp"
#include "aflow/ir.hpp"

namespace aflow {

// The three concrete syntaxes. All parse into the same Workflow value and
// every valid workflow emitted in a style re-parses to a canonical-equal
// value under that style.
enum class SyntaxStyle { declarative, dataflow, pseudo_natural };

std::string_view to_string(SyntaxStyle s);
std::optional<SyntaxStyle> style_from_string(std::string_view s);
// .adl / .adf / .apn
std::string_view file_extension(SyntaxStyle s);
std::optional<SyntaxStyle> style_from_extension(std::string_view path);

struct ParseOutcome {
  // Present iff no Error diagnostic of category InvalidFormat was produced.
  // Statement-level reference problems (edge to an undeclared node, occupied
  // input) are reported as ConnectionError and the offending statement is
  // dropped, so a workflow may coexist with Error diagnostics.
  std::optional<Workflow> workflow;
  std::vector<Diagnostic> diagnostics;
  // Source position of each node declaration, keyed by node id.
  std::map<std::string, SourceSpan> node_spans;
  // Source position of each retained edge, parallel to workflow->edges().
  std::vector<SourceSpan> edge_spans;

  bool ok() const { return workflow.has_value() && !has_errors(diagnostics); }
};

// Structural parse only: the registry is never consulted. Unknown types,
// ports and parameter problems are the validator's concern.
ParseOutcome parse(std::string_view text, SyntaxStyle style);

// Deterministic pretty-printer: nodes in canonical order (topological for
// the dataflow style, sorted by id otherwise), parameters sorted by name,
// edges sorted by destination. parse(emit(w, s), s) is canonical-equal to w
// for every style. Throws UnrepresentableWorkflow when the workflow cannot
// be expressed in the grammar (a cyclic workflow in the dataflow style).
std::string emit(const Workflow& w, SyntaxStyle style);

struct ConvertResult {
  std::optional<std::string> text;
  std::vector<Diagnostic> diagnostics;
};

// parse under `from`, emit under `to`; parse failures propagate.
ConvertResult convert(std::string_view text, SyntaxStyle from, SyntaxStyle to);

// Literal rendering shared by all emitters (quoted/escaped strings, reals
// always carrying a '.' or exponent so the value re-parses as a real).
std::string render_literal(const ParamValue& v);

}  // namespace aflow
