#include <cstdio>
#include <cstdlib>
#include <string>

#include "aflow/syntax.hpp"

#include "aflow/errors.hpp"

namespace aflow {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += "\"";
  return out;
}

// Shortest decimal form that parses back to the same double, always carrying
// a '.' or exponent so the literal keeps its real kind on re-parse.
std::string render_real(double d) {
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, d);
    if (std::strtod(buf, nullptr) == d) break;
  }
  std::string out = buf;
  if (out.find_first_of(".eE") == std::string::npos) out += ".0";
  return out;
}

// Identifier check on names that flow into program text. Node ids satisfy it
// by construction; port and parameter names may come from foreign documents.
void require_identifier(std::string_view name, const char* role) {
  if (!is_identifier(name)) {
    throw UnrepresentableWorkflow(std::string(role) + " '" + std::string(name) +
                                  "' is not expressible in program text");
  }
}

void check_names(const Workflow& w) {
  for (const auto& n : w.nodes()) {
    for (const auto& [k, v] : n.params) require_identifier(k, "parameter name");
  }
  for (const auto& e : w.edges()) {
    require_identifier(e.src.port_name, "port name");
    require_identifier(e.dst.port_name, "port name");
  }
}

std::string emit_declarative(const Workflow& w) {
  Workflow c = canonicalize(w);
  if (c.empty()) return "workflow { }\n";
  std::string out = "workflow {\n";
  for (const auto& n : c.nodes()) {
    out += "  node " + n.id + " = " + n.type_name + "(";
    for (std::size_t i = 0; i < n.params.size(); ++i) {
      if (i) out += ", ";
      out += n.params[i].first + "=" + render_literal(n.params[i].second);
    }
    out += ");\n";
  }
  for (const auto& e : c.edges()) {
    out += "  " + e.src.node_id + "." + e.src.port_name + " -> " + e.dst.node_id + "." +
           e.dst.port_name + ";\n";
  }
  out += "}\n";
  return out;
}

std::string emit_dataflow(const Workflow& w) {
  std::vector<std::string> order;
  try {
    order = w.topological_order();
  } catch (const CycleError& e) {
    throw UnrepresentableWorkflow(std::string("cyclic workflow has no dataflow form (") +
                                  e.what() + ")");
  }
  Workflow c = canonicalize(w);
  std::string out;
  for (const auto& id : order) {
    const NodeInstance& n = *c.find_node(id);
    out += n.id + " = " + n.type_name + "(";
    bool first = true;
    for (const auto& [k, v] : n.params) {
      if (!first) out += ", ";
      first = false;
      out += k + "=" + render_literal(v);
    }
    for (const auto& e : c.incoming_flows(id)) {
      if (!first) out += ", ";
      first = false;
      out += e.dst.port_name + "=" + e.src.node_id + "." + e.src.port_name;
    }
    out += ");\n";
  }
  return out;
}

std::string emit_pseudo(const Workflow& w) {
  Workflow c = canonicalize(w);
  std::string out;
  for (const auto& n : c.nodes()) {
    out += "make " + n.type_name + " as " + n.id + ".\n";
    for (const auto& [k, v] : n.params) {
      out += "set " + n.id + " " + k + " to " + render_literal(v) + ".\n";
    }
  }
  for (const auto& e : c.edges()) {
    out += "feed " + e.src.node_id + " " + e.src.port_name + " into " + e.dst.node_id + " " +
           e.dst.port_name + ".\n";
  }
  return out;
}

}  // namespace

std::string render_literal(const ParamValue& v) {
  switch (v.kind()) {
    case ParamValue::Kind::integer: return std::to_string(v.as_integer());
    case ParamValue::Kind::real: return render_real(v.as_real());
    case ParamValue::Kind::string: return quote(v.as_string());
    case ParamValue::Kind::boolean: return v.as_boolean() ? "true" : "false";
  }
  return {};
}

std::string emit(const Workflow& w, SyntaxStyle style) {
  check_names(w);
  switch (style) {
    case SyntaxStyle::declarative: return emit_declarative(w);
    case SyntaxStyle::dataflow: return emit_dataflow(w);
    case SyntaxStyle::pseudo_natural: return emit_pseudo(w);
  }
  return {};
}

ConvertResult convert(std::string_view text, SyntaxStyle from, SyntaxStyle to) {
  ParseOutcome outcome = parse(text, from);
  ConvertResult result;
  result.diagnostics = outcome.diagnostics;
  if (!outcome.ok()) return result;
  result.text = emit(*outcome.workflow, to);
  return result;
}

}  // namespace aflow
