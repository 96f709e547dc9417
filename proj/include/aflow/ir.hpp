#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "aflow/errors.hpp"

namespace aflow {

// Data kind carried on a port. `any` is compatible with every tag; all other
// tags are compatible only with themselves or `any`.
enum class Modality {
  image,
  latent,
  conditioning,
  text,
  audio,
  video,
  mesh,
  model,
  mask,
  number,
  any,
};

std::string_view to_string(Modality m);
std::optional<Modality> modality_from_string(std::string_view s);
bool compatible(Modality from, Modality to);

// A literal bound to a node parameter: integer, real, string or boolean.
// Reals are always finite; the constructor rejects NaN and infinities.
class ParamValue {
 public:
  enum class Kind { integer, real, string, boolean };

  ParamValue() : value_(std::int64_t{0}) {}
  ParamValue(std::int64_t v) : value_(v) {}
  ParamValue(int v) : value_(std::int64_t{v}) {}
  ParamValue(double v);
  ParamValue(std::string v) : value_(std::move(v)) {}
  ParamValue(const char* v) : value_(std::string(v)) {}
  ParamValue(bool v) : value_(v) {}

  Kind kind() const;
  bool is_integer() const { return kind() == Kind::integer; }
  bool is_real() const { return kind() == Kind::real; }
  bool is_string() const { return kind() == Kind::string; }
  bool is_boolean() const { return kind() == Kind::boolean; }

  std::int64_t as_integer() const { return std::get<std::int64_t>(value_); }
  double as_real() const { return std::get<double>(value_); }
  const std::string& as_string() const { return std::get<std::string>(value_); }
  bool as_boolean() const { return std::get<bool>(value_); }

  // Numeric view: integers widen to double, used for range checks.
  std::optional<double> numeric() const;

  bool operator==(const ParamValue& other) const { return value_ == other.value_; }

 private:
  std::variant<std::int64_t, double, std::string, bool> value_;
};

// Parameter bindings keep insertion order; keys are unique.
using ParamMap = std::vector<std::pair<std::string, ParamValue>>;

const ParamValue* find_param(const ParamMap& params, std::string_view name);

bool is_identifier(std::string_view s);

// One atomic computational unit instance: a registry type plus its bound
// parameter configuration.
struct NodeInstance {
  std::string id;
  std::string type_name;
  ParamMap params;

  const ParamValue* param(std::string_view name) const { return find_param(params, name); }

  bool operator==(const NodeInstance& other) const = default;
};

struct PortRef {
  std::string node_id;
  std::string port_name;

  bool operator==(const PortRef& other) const = default;
  auto operator<=>(const PortRef& other) const = default;
};

// A single directed data flow from a source output port to a target input
// port. Self-loops are representable here; the validator rejects them as
// cycles.
struct Edge {
  PortRef src;
  PortRef dst;

  bool operator==(const Edge& other) const = default;
};

// The symbolic task value: named node instances, their parameter bindings and
// the directed port-to-port edges between them. Node insertion order is
// preserved; each input port receives at most one flow and every edge
// endpoint resolves to an existing node (checked on every mutation).
//
// Workflows are plain values: copy freely, mutate only exclusively-owned
// instances. No interior shared state, safe to move across threads.
class Workflow {
 public:
  Workflow() = default;

  // Throws DuplicateNodeId if `id` is taken, InvalidIdentifier when `id` is
  // not a valid identifier, InvalidValue for duplicate parameter keys.
  void add_node(std::string id, std::string type_name, ParamMap params = {});

  // Removes the node and every edge touching it. Throws UnknownNode.
  void remove_node(std::string_view id);

  // Appends an edge. Throws UnknownNode if either endpoint is missing and
  // InputOccupied when the destination port is already fed.
  void connect(std::string_view src_node, std::string_view src_output,
               std::string_view dst_node, std::string_view dst_input);

  // Removes the edge feeding (dst_node, dst_input). Throws UnknownEdge.
  void disconnect(std::string_view dst_node, std::string_view dst_input);

  bool has_node(std::string_view id) const { return find_node(id) != nullptr; }
  const NodeInstance* find_node(std::string_view id) const;
  NodeInstance* find_node(std::string_view id);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty() && edges_.empty(); }

  const std::vector<NodeInstance>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  // Edges targeting `node_id`, sorted by destination port name.
  // Throws UnknownNode.
  std::vector<Edge> incoming_flows(std::string_view node_id) const;

  // Edges leaving `node_id`, sorted by (src port, dst node, dst port).
  // Throws UnknownNode.
  std::vector<Edge> outgoing_flows(std::string_view node_id) const;

  const Edge* edge_into(std::string_view dst_node, std::string_view dst_input) const;

  // Node ids ordered so every edge's source precedes its destination, ties
  // broken lexicographically. Throws CycleError listing one cycle.
  std::vector<std::string> topological_order() const;

  bool operator==(const Workflow& other) const = default;

 private:
  std::vector<NodeInstance> nodes_;
  std::vector<Edge> edges_;
  std::map<std::string, std::string> metadata_;
};

Workflow new_workflow();

// Sorted form: nodes by id, parameters by name, edges by (dst node, dst
// port). Idempotent and invariant under insertion order. Metadata is kept
// verbatim.
Workflow canonicalize(const Workflow& w);

// Structural equality of canonical forms; metadata is ignored.
bool canonical_equal(const Workflow& a, const Workflow& b);

// Native serialization: canonical JSON document with byte-stable key order.
std::string workflow_to_json(const Workflow& w, int indent = 2);
Workflow workflow_from_json(const std::string& text);

}  // namespace aflow
