#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aflow/diagnostics.hpp"
#include "aflow/ir.hpp"

namespace aflow {

enum class ParamKind { int_, real, string, bool_, choice };

std::string_view to_string(ParamKind k);
std::optional<ParamKind> param_kind_from_string(std::string_view s);

// One declarable parameter: kind, optional default, optional numeric range
// or choice list. Optional parameters (required=false) always carry a
// default, so resolution can bind every declared name.
struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::string;
  std::optional<ParamValue> default_value;
  std::optional<std::pair<double, double>> range;  // numeric kinds only
  std::vector<std::string> choices;                // choice kind only
  bool required = false;
};

struct PortSpec {
  std::string name;
  Modality modality = Modality::any;
  bool required = true;  // inputs only; unused for outputs
};

// Registry entry describing one atomic function type.
struct FunctionSchema {
  std::string type_name;
  std::vector<PortSpec> inputs;
  std::vector<PortSpec> outputs;
  std::vector<ParamSpec> params;
  std::string doc;
  // Side-effecting terminal (save/preview); reachability warnings are
  // computed against nodes of sink types.
  bool sink = false;

  const PortSpec* find_input(std::string_view name) const;
  const PortSpec* find_output(std::string_view name) const;
  const ParamSpec* find_param(std::string_view name) const;
  // Position of an output port in declaration order, or -1.
  int output_index(std::string_view name) const;
};

// The environment's function catalog. Immutable after load; freely shareable
// across threads.
class Registry {
 public:
  Registry() = default;
  Registry(std::string version, std::vector<FunctionSchema> schemas);

  // nullptr when the type is not declared.
  const FunctionSchema* find(std::string_view type_name) const;
  // Throws UnknownFunctionError. Lookups are case-sensitive exact matches.
  const FunctionSchema& lookup(std::string_view type_name) const;

  std::size_t size() const { return order_.size(); }
  const std::string& version() const { return version_; }
  // Type names in catalog declaration order.
  const std::vector<std::string>& type_names() const { return order_; }

 private:
  std::string version_;
  std::vector<std::string> order_;
  std::map<std::string, FunctionSchema, std::less<>> schemas_;
};

// Parses the catalog document. Throws CatalogSyntaxError on malformed JSON,
// DuplicateTypeName, or InvalidSpec for inconsistent parameter specs.
Registry load_catalog(const std::string& document);
Registry load_catalog_file(const std::string& path);
std::string save_catalog(const Registry& r, int indent = 2);

struct ResolvedParams {
  ParamMap values;  // schema declaration order
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

// Binds every declared parameter: the given value when present and valid,
// otherwise the default. Missing required values, out-of-range or ill-typed
// values, and unknown names yield InvalidParameter diagnostics with
// schema-scope locations (the validator rewrites them onto nodes).
ResolvedParams resolve_params(const FunctionSchema& schema, const ParamMap& given);

// Copy of `w` with every known-type node's parameters fully resolved
// (defaults filled, in schema order). Nodes of unknown type are untouched.
Workflow resolve_workflow_params(const Workflow& w, const Registry& r);

}  // namespace aflow
