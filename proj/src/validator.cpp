#include "aflow/validator.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

namespace aflow {

namespace {

// Tarjan strongly-connected components; nontrivial SCCs (size > 1 or a
// self-loop) are the cycles reported to the user.
class SccFinder {
 public:
  explicit SccFinder(const Workflow& w) : w_(w) {
    for (const auto& n : w.nodes()) adj_[n.id];
    for (const auto& e : w.edges()) adj_[e.src.node_id].insert(e.dst.node_id);
  }

  std::vector<std::vector<std::string>> nontrivial_components() {
    for (const auto& [id, _] : adj_) {
      if (!index_.count(id)) strongconnect(id);
    }
    std::vector<std::vector<std::string>> result;
    for (auto& comp : components_) {
      bool self_loop = comp.size() == 1 && adj_.at(comp[0]).count(comp[0]);
      if (comp.size() > 1 || self_loop) {
        std::sort(comp.begin(), comp.end());
        result.push_back(std::move(comp));
      }
    }
    std::sort(result.begin(), result.end());
    return result;
  }

 private:
  void strongconnect(const std::string& v) {
    index_[v] = low_[v] = counter_++;
    stack_.push_back(v);
    on_stack_.insert(v);
    for (const auto& next : adj_.at(v)) {
      if (!index_.count(next)) {
        strongconnect(next);
        low_[v] = std::min(low_[v], low_[next]);
      } else if (on_stack_.count(next)) {
        low_[v] = std::min(low_[v], index_[next]);
      }
    }
    if (low_[v] == index_[v]) {
      std::vector<std::string> comp;
      while (true) {
        std::string u = stack_.back();
        stack_.pop_back();
        on_stack_.erase(u);
        comp.push_back(u);
        if (u == v) break;
      }
      components_.push_back(std::move(comp));
    }
  }

  const Workflow& w_;
  std::map<std::string, std::set<std::string>> adj_;
  std::map<std::string, int> index_, low_;
  std::vector<std::string> stack_;
  std::set<std::string> on_stack_;
  std::vector<std::vector<std::string>> components_;
  int counter_ = 0;
};

}  // namespace

std::vector<Diagnostic> check(const Workflow& w, const Registry& r) {
  std::vector<Diagnostic> diags;
  auto report = [&](ErrorCategory cat, Severity sev, Location loc, std::string msg) {
    diags.push_back(Diagnostic{cat, sev, std::move(loc), std::move(msg)});
  };

  // (a) type resolution; (b) parameter resolution for known types.
  for (const auto& n : w.nodes()) {
    const FunctionSchema* schema = r.find(n.type_name);
    if (!schema) {
      report(ErrorCategory::UnknownFunction, Severity::Error, Location::at_node(n.id),
             "unknown function type '" + n.type_name + "'");
      continue;
    }
    ResolvedParams resolved = resolve_params(*schema, n.params);
    for (auto d : resolved.diagnostics) {
      d.location = Location::at_node(n.id);
      diags.push_back(std::move(d));
    }
  }

  // (c) edge ports exist on their schemas and modalities line up. Edges
  // touching unknown-type nodes are skipped: (a) already covers them.
  for (const auto& e : w.edges()) {
    const NodeInstance* src = w.find_node(e.src.node_id);
    const NodeInstance* dst = w.find_node(e.dst.node_id);
    const FunctionSchema* src_schema = r.find(src->type_name);
    const FunctionSchema* dst_schema = r.find(dst->type_name);
    std::string edge_name = e.src.node_id + "." + e.src.port_name + " -> " + e.dst.node_id +
                            "." + e.dst.port_name;
    const PortSpec* out_port = nullptr;
    const PortSpec* in_port = nullptr;
    if (src_schema) {
      out_port = src_schema->find_output(e.src.port_name);
      if (!out_port) {
        report(ErrorCategory::ConnectionError, Severity::Error,
               Location::at_port(e.src.node_id, e.src.port_name),
               "'" + src->type_name + "' has no output '" + e.src.port_name + "' (edge " +
                   edge_name + ")");
      }
    }
    if (dst_schema) {
      in_port = dst_schema->find_input(e.dst.port_name);
      if (!in_port) {
        report(ErrorCategory::ConnectionError, Severity::Error,
               Location::at_port(e.dst.node_id, e.dst.port_name),
               "'" + dst->type_name + "' has no input '" + e.dst.port_name + "' (edge " +
                   edge_name + ")");
      }
    }
    if (out_port && in_port && !compatible(out_port->modality, in_port->modality)) {
      report(ErrorCategory::ConnectionError, Severity::Error,
             Location::at_port(e.dst.node_id, e.dst.port_name),
             "modality mismatch on " + edge_name + ": " + std::string(to_string(out_port->modality)) +
                 " does not flow into " + std::string(to_string(in_port->modality)));
    }
  }

  // (d) every required input of every known-type node is fed.
  for (const auto& n : w.nodes()) {
    const FunctionSchema* schema = r.find(n.type_name);
    if (!schema) continue;
    for (const auto& port : schema->inputs) {
      if (port.required && !w.edge_into(n.id, port.name)) {
        report(ErrorCategory::TopologicalGap, Severity::Error,
               Location::at_port(n.id, port.name),
               "required input '" + n.id + "." + port.name + "' receives no flow");
      }
    }
  }

  // (e) cycles are fatal; nodes that cannot reach any sink-typed node are
  // flagged as dangling when the workflow has sinks at all.
  auto cycles = SccFinder(w).nontrivial_components();
  std::set<std::string> in_cycle;
  for (const auto& comp : cycles) {
    std::string msg = "cycle:";
    for (const auto& id : comp) msg += " " + id;
    report(ErrorCategory::CycleOrUnreachable, Severity::Error, Location::at_node(comp.front()),
           msg);
    in_cycle.insert(comp.begin(), comp.end());
  }

  std::vector<std::string> sink_nodes;
  for (const auto& n : w.nodes()) {
    const FunctionSchema* schema = r.find(n.type_name);
    if (schema && schema->sink) sink_nodes.push_back(n.id);
  }
  if (!sink_nodes.empty()) {
    // Reverse reachability from sinks.
    std::map<std::string, std::set<std::string>> rev;
    for (const auto& e : w.edges()) rev[e.dst.node_id].insert(e.src.node_id);
    std::set<std::string> reaches(sink_nodes.begin(), sink_nodes.end());
    std::vector<std::string> frontier = sink_nodes;
    while (!frontier.empty()) {
      std::string id = std::move(frontier.back());
      frontier.pop_back();
      for (const auto& prev : rev[id]) {
        if (reaches.insert(prev).second) frontier.push_back(prev);
      }
    }
    for (const auto& n : w.nodes()) {
      if (!reaches.count(n.id) && !in_cycle.count(n.id)) {
        report(ErrorCategory::CycleOrUnreachable, Severity::Warning, Location::at_node(n.id),
               "node '" + n.id + "' feeds no output node");
      }
    }
  }

  sort_diagnostics(diags);
  return diags;
}

}  // namespace aflow
