#include "aflow/ir.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "json.hpp"

namespace aflow {

namespace {

const char* kModalityNames[] = {
    "image", "latent", "conditioning", "text",   "audio", "video",
    "mesh",  "model",  "mask",         "number", "any",
};

}  // namespace

std::string_view to_string(Modality m) {
  return kModalityNames[static_cast<int>(m)];
}

std::optional<Modality> modality_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(Modality::any); ++i) {
    if (s == kModalityNames[i]) return static_cast<Modality>(i);
  }
  return std::nullopt;
}

bool compatible(Modality from, Modality to) {
  return from == to || from == Modality::any || to == Modality::any;
}

ParamValue::ParamValue(double v) : value_(v) {
  if (!std::isfinite(v)) throw InvalidValue("real parameter values must be finite");
}

ParamValue::Kind ParamValue::kind() const {
  switch (value_.index()) {
    case 0: return Kind::integer;
    case 1: return Kind::real;
    case 2: return Kind::string;
    default: return Kind::boolean;
  }
}

std::optional<double> ParamValue::numeric() const {
  if (is_integer()) return static_cast<double>(as_integer());
  if (is_real()) return as_real();
  return std::nullopt;
}

const ParamValue* find_param(const ParamMap& params, std::string_view name) {
  for (const auto& [key, value] : params) {
    if (key == name) return &value;
  }
  return nullptr;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
  if (!head(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), tail);
}

void Workflow::add_node(std::string id, std::string type_name, ParamMap params) {
  if (!is_identifier(id)) throw InvalidIdentifier("invalid node id '" + id + "'");
  if (!is_identifier(type_name)) throw InvalidIdentifier("invalid type name '" + type_name + "'");
  if (has_node(id)) throw DuplicateNodeId("node id '" + id + "' already exists");
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t j = i + 1; j < params.size(); ++j) {
      if (params[i].first == params[j].first) {
        throw InvalidValue("duplicate parameter '" + params[i].first + "' on node '" + id + "'");
      }
    }
  }
  nodes_.push_back(NodeInstance{std::move(id), std::move(type_name), std::move(params)});
}

void Workflow::remove_node(std::string_view id) {
  auto it = std::find_if(nodes_.begin(), nodes_.end(),
                         [&](const NodeInstance& n) { return n.id == id; });
  if (it == nodes_.end()) throw UnknownNode("unknown node '" + std::string(id) + "'");
  nodes_.erase(it);
  std::erase_if(edges_, [&](const Edge& e) {
    return e.src.node_id == id || e.dst.node_id == id;
  });
}

void Workflow::connect(std::string_view src_node, std::string_view src_output,
                       std::string_view dst_node, std::string_view dst_input) {
  if (!has_node(src_node)) throw UnknownNode("unknown node '" + std::string(src_node) + "'");
  if (!has_node(dst_node)) throw UnknownNode("unknown node '" + std::string(dst_node) + "'");
  if (src_output.empty() || dst_input.empty()) throw InvalidIdentifier("port names must be nonempty");
  if (edge_into(dst_node, dst_input) != nullptr) {
    throw InputOccupied("input '" + std::string(dst_node) + "." + std::string(dst_input) +
                        "' already receives a flow");
  }
  edges_.push_back(Edge{PortRef{std::string(src_node), std::string(src_output)},
                        PortRef{std::string(dst_node), std::string(dst_input)}});
}

void Workflow::disconnect(std::string_view dst_node, std::string_view dst_input) {
  auto it = std::find_if(edges_.begin(), edges_.end(), [&](const Edge& e) {
    return e.dst.node_id == dst_node && e.dst.port_name == dst_input;
  });
  if (it == edges_.end()) {
    throw UnknownEdge("no edge feeds '" + std::string(dst_node) + "." + std::string(dst_input) + "'");
  }
  edges_.erase(it);
}

const NodeInstance* Workflow::find_node(std::string_view id) const {
  for (const auto& n : nodes_) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

NodeInstance* Workflow::find_node(std::string_view id) {
  for (auto& n : nodes_) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::vector<Edge> Workflow::incoming_flows(std::string_view node_id) const {
  if (!has_node(node_id)) throw UnknownNode("unknown node '" + std::string(node_id) + "'");
  std::vector<Edge> result;
  for (const auto& e : edges_) {
    if (e.dst.node_id == node_id) result.push_back(e);
  }
  std::sort(result.begin(), result.end(),
            [](const Edge& a, const Edge& b) { return a.dst < b.dst; });
  return result;
}

std::vector<Edge> Workflow::outgoing_flows(std::string_view node_id) const {
  if (!has_node(node_id)) throw UnknownNode("unknown node '" + std::string(node_id) + "'");
  std::vector<Edge> result;
  for (const auto& e : edges_) {
    if (e.src.node_id == node_id) result.push_back(e);
  }
  std::sort(result.begin(), result.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.src.port_name, a.dst) < std::tie(b.src.port_name, b.dst);
  });
  return result;
}

const Edge* Workflow::edge_into(std::string_view dst_node, std::string_view dst_input) const {
  for (const auto& e : edges_) {
    if (e.dst.node_id == dst_node && e.dst.port_name == dst_input) return &e;
  }
  return nullptr;
}

std::vector<std::string> Workflow::topological_order() const {
  std::map<std::string, int> indegree;
  std::map<std::string, std::set<std::string>> successors;
  for (const auto& n : nodes_) indegree[n.id] = 0;
  for (const auto& e : edges_) {
    // Parallel edges between the same pair count once for scheduling.
    if (successors[e.src.node_id].insert(e.dst.node_id).second) {
      ++indegree[e.dst.node_id];
    }
  }

  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.push(id);
  }

  std::vector<std::string> order;
  order.reserve(nodes_.size());
  while (!ready.empty()) {
    std::string id = ready.top();
    ready.pop();
    order.push_back(id);
    for (const auto& next : successors[id]) {
      if (--indegree[next] == 0) ready.push(next);
    }
  }

  if (order.size() == nodes_.size()) return order;

  // Kahn residue contains every node on or downstream of a cycle. Walk the
  // residue from its smallest id, always taking the smallest residual
  // successor, until a node repeats; that suffix is a concrete cycle.
  std::set<std::string> residue;
  for (const auto& [id, deg] : indegree) {
    if (deg > 0) residue.insert(id);
  }
  std::vector<std::string> path;
  std::map<std::string, std::size_t> seen_at;
  std::string current = *residue.begin();
  while (!seen_at.count(current)) {
    seen_at[current] = path.size();
    path.push_back(current);
    const auto& succ = successors[current];
    std::string next;
    for (const auto& s : succ) {
      if (residue.count(s)) { next = s; break; }
    }
    current = next;
  }
  std::vector<std::string> cycle(path.begin() + seen_at[current], path.end());
  auto smallest = std::min_element(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), smallest, cycle.end());
  std::string msg = "cycle detected:";
  for (const auto& id : cycle) msg += " " + id;
  throw CycleError(msg, cycle);
}

Workflow new_workflow() { return Workflow{}; }

Workflow canonicalize(const Workflow& w) {
  std::vector<NodeInstance> nodes = w.nodes();
  std::sort(nodes.begin(), nodes.end(),
            [](const NodeInstance& a, const NodeInstance& b) { return a.id < b.id; });
  std::vector<Edge> edges = w.edges();
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.dst < b.dst; });

  Workflow out;
  for (auto& n : nodes) {
    std::sort(n.params.begin(), n.params.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    out.add_node(std::move(n.id), std::move(n.type_name), std::move(n.params));
  }
  for (const auto& e : edges) {
    out.connect(e.src.node_id, e.src.port_name, e.dst.node_id, e.dst.port_name);
  }
  out.metadata() = w.metadata();
  return out;
}

bool canonical_equal(const Workflow& a, const Workflow& b) {
  Workflow ca = canonicalize(a);
  Workflow cb = canonicalize(b);
  return ca.nodes() == cb.nodes() && ca.edges() == cb.edges();
}

namespace {

nlohmann::ordered_json param_to_json(const ParamValue& v) {
  switch (v.kind()) {
    case ParamValue::Kind::integer: return v.as_integer();
    case ParamValue::Kind::real: return v.as_real();
    case ParamValue::Kind::string: return v.as_string();
    case ParamValue::Kind::boolean: return v.as_boolean();
  }
  return nullptr;
}

ParamValue param_from_json(const nlohmann::ordered_json& j) {
  if (j.is_boolean()) return ParamValue(j.get<bool>());
  if (j.is_number_integer()) return ParamValue(j.get<std::int64_t>());
  if (j.is_number_float()) return ParamValue(j.get<double>());
  if (j.is_string()) return ParamValue(j.get<std::string>());
  throw InvalidValue("unsupported parameter value: " + j.dump());
}

}  // namespace

std::string workflow_to_json(const Workflow& w, int indent) {
  Workflow c = canonicalize(w);
  nlohmann::ordered_json doc;
  doc["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : c.nodes()) {
    nlohmann::ordered_json jn;
    jn["id"] = n.id;
    jn["type"] = n.type_name;
    jn["params"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : n.params) jn["params"][k] = param_to_json(v);
    doc["nodes"].push_back(std::move(jn));
  }
  doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : c.edges()) {
    nlohmann::ordered_json je;
    je["src"] = {e.src.node_id, e.src.port_name};
    je["dst"] = {e.dst.node_id, e.dst.port_name};
    doc["edges"].push_back(std::move(je));
  }
  doc["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : c.metadata()) doc["metadata"][k] = v;
  return doc.dump(indent) + "\n";
}

Workflow workflow_from_json(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidValue(std::string("workflow json: ") + e.what());
  }
  Workflow w;
  try {
    for (const auto& jn : doc.value("nodes", nlohmann::ordered_json::array())) {
      ParamMap params;
      if (jn.contains("params")) {
        for (const auto& [k, v] : jn.at("params").items()) {
          params.emplace_back(k, param_from_json(v));
        }
      }
      w.add_node(jn.at("id").get<std::string>(), jn.at("type").get<std::string>(),
                 std::move(params));
    }
    for (const auto& je : doc.value("edges", nlohmann::ordered_json::array())) {
      const auto& src = je.at("src");
      const auto& dst = je.at("dst");
      w.connect(src.at(0).get<std::string>(), src.at(1).get<std::string>(),
                dst.at(0).get<std::string>(), dst.at(1).get<std::string>());
    }
    if (doc.contains("metadata")) {
      for (const auto& [k, v] : doc.at("metadata").items()) {
        w.metadata()[k] = v.get<std::string>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidValue(std::string("workflow json: ") + e.what());
  }
  return w;
}

}  // namespace aflow
