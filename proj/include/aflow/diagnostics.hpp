#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aflow {

// The closed failure taxonomy. Every diagnostic carries exactly one tag:
//   InvalidFormat      — text does not parse / malformed machine output
//   UnknownFunction    — node type missing from the registry
//   InvalidParameter   — parameter unknown, ill-typed, missing or out of range
//   ConnectionError    — edge endpoint/port/modality problems
//   TopologicalGap     — required input port left unfed
//   CycleOrUnreachable — graph not executable as a whole
enum class ErrorCategory {
  InvalidFormat,
  UnknownFunction,
  InvalidParameter,
  ConnectionError,
  TopologicalGap,
  CycleOrUnreachable,
};

enum class Severity { Error, Warning };

std::string_view to_string(ErrorCategory c);
std::optional<ErrorCategory> category_from_string(std::string_view s);
std::string_view to_string(Severity s);

struct SourceSpan {
  int line = 0;  // 1-based
  int col = 0;   // 1-based

  bool operator==(const SourceSpan&) const = default;
  auto operator<=>(const SourceSpan&) const = default;
};

// Where a diagnostic points: a node, a node's port, a spot in source text,
// or nothing (whole-program problems). Fields compose, e.g. a parse
// diagnostic may carry both a node id and its source span.
struct Location {
  std::optional<std::string> node;
  std::optional<std::string> port;
  std::optional<SourceSpan> span;

  static Location none() { return {}; }
  static Location at_node(std::string id) { return {std::move(id), {}, {}}; }
  static Location at_port(std::string id, std::string port) {
    return {std::move(id), std::move(port), {}};
  }
  static Location at_span(SourceSpan s) { return {{}, {}, s}; }

  // Compact rendering: "node", "node.port", "line:col" or "".
  std::string render() const;

  bool operator==(const Location&) const = default;
};

struct Diagnostic {
  ErrorCategory category = ErrorCategory::InvalidFormat;
  Severity severity = Severity::Error;
  Location location;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

// Deterministic presentation order: category, then rendered location, then
// message.
void sort_diagnostics(std::vector<Diagnostic>& diags);

bool has_errors(std::span<const Diagnostic> diags);

// True iff no Error-severity diagnostic is present; warnings do not block
// execution.
bool is_executable(std::span<const Diagnostic> diags);

std::string diagnostic_to_text(const Diagnostic& d);

// Stable machine format: {"category","severity","location","message"}.
std::string diagnostics_to_json(std::span<const Diagnostic> diags, int indent = 2);

}  // namespace aflow
