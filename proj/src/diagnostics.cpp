#include "aflow/diagnostics.hpp"

#include <algorithm>
#include <tuple>

#include "json.hpp"

namespace aflow {

namespace {

const char* kCategoryNames[] = {
    "InvalidFormat",  "UnknownFunction", "InvalidParameter",
    "ConnectionError", "TopologicalGap",  "CycleOrUnreachable",
};

}  // namespace

std::string_view to_string(ErrorCategory c) {
  return kCategoryNames[static_cast<int>(c)];
}

std::optional<ErrorCategory> category_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(ErrorCategory::CycleOrUnreachable); ++i) {
    if (s == kCategoryNames[i]) return static_cast<ErrorCategory>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Severity s) {
  return s == Severity::Error ? "error" : "warning";
}

std::string Location::render() const {
  if (node) {
    if (port) return *node + "." + *port;
    return *node;
  }
  if (span) return std::to_string(span->line) + ":" + std::to_string(span->col);
  return "";
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::make_tuple(static_cast<int>(a.category), a.location.render(), a.message) <
           std::make_tuple(static_cast<int>(b.category), b.location.render(), b.message);
  });
}

bool has_errors(std::span<const Diagnostic> diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

bool is_executable(std::span<const Diagnostic> diags) { return !has_errors(diags); }

std::string diagnostic_to_text(const Diagnostic& d) {
  std::string out(to_string(d.severity));
  out += "[";
  out += to_string(d.category);
  out += "]";
  std::string where = d.location.render();
  if (!where.empty()) {
    out += " at ";
    out += where;
  }
  out += ": ";
  out += d.message;
  return out;
}

std::string diagnostics_to_json(std::span<const Diagnostic> diags, int indent) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& d : diags) {
    nlohmann::ordered_json j;
    j["category"] = std::string(to_string(d.category));
    j["severity"] = std::string(to_string(d.severity));
    j["location"] = d.location.render();
    j["message"] = d.message;
    arr.push_back(std::move(j));
  }
  return arr.dump(indent) + "\n";
}

}  // namespace aflow
