#include "aflow/executor.hpp"

#include <algorithm>

#include "json.hpp"

#include "aflow/syntax.hpp"
#include "aflow/validator.hpp"

namespace aflow {

const Artifact* ExecutionTrace::output(std::string_view node, std::string_view port) const {
  auto it = outputs.find({std::string(node), std::string(port)});
  return it == outputs.end() ? nullptr : &it->second;
}

std::string trace_to_json(const ExecutionTrace& t, int indent) {
  nlohmann::ordered_json doc;
  doc["status"] = t.status == RunStatus::Completed ? "completed" : "failed";
  doc["order"] = t.order;
  doc["outputs"] = nlohmann::ordered_json::array();
  for (const auto& [key, artifact] : t.outputs) {
    doc["outputs"].push_back({{"node", key.first},
                              {"port", key.second},
                              {"modality", std::string(to_string(artifact.modality))},
                              {"token", artifact.token}});
  }
  if (t.failure) {
    doc["failure"] = {{"node", t.failure->node_id}, {"message", t.failure->message}};
  } else {
    doc["failure"] = nullptr;
  }
  return doc.dump(indent) + "\n";
}

std::string fingerprint_token(const std::string& type_name, const ParamMap& resolved_params,
                              std::vector<std::string> input_tokens,
                              const std::string& port_name, std::optional<std::uint64_t> seed) {
  ParamMap params = resolved_params;
  std::sort(params.begin(), params.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::sort(input_tokens.begin(), input_tokens.end());

  std::string encoded = type_name + "|";
  for (const auto& [k, v] : params) encoded += k + "=" + render_literal(v) + ";";
  encoded += "|";
  for (const auto& tok : input_tokens) encoded += tok + ",";
  encoded += "|" + port_name;
  if (seed) encoded += "|seed=" + std::to_string(*seed);

  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : encoded) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

class SimulatedBackend final : public Backend {
 public:
  std::vector<Artifact> run_node(const FunctionSchema& schema, const ParamMap& resolved_params,
                                 const std::map<std::string, Artifact>& inputs,
                                 std::optional<std::uint64_t> seed) override {
    std::vector<std::string> tokens;
    tokens.reserve(inputs.size());
    for (const auto& [port, artifact] : inputs) tokens.push_back(artifact.token);

    std::vector<Artifact> out;
    out.reserve(schema.outputs.size());
    for (const auto& port : schema.outputs) {
      out.push_back(Artifact{
          port.modality,
          fingerprint_token(schema.type_name, resolved_params, tokens, port.name, seed)});
    }
    return out;
  }
};

}  // namespace

std::unique_ptr<Backend> simulated_backend() { return std::make_unique<SimulatedBackend>(); }

ExecutionTrace execute(const Workflow& w, const Registry& r, Backend& backend,
                       const SeedMap& seeds) {
  auto diags = check(w, r);
  if (!is_executable(diags)) {
    std::string first;
    for (const auto& d : diags) {
      if (d.severity == Severity::Error) {
        first = diagnostic_to_text(d);
        break;
      }
    }
    throw PreconditionViolated("workflow is not executable: " + first);
  }

  ExecutionTrace trace;
  trace.order = w.topological_order();
  for (const auto& id : trace.order) {
    const NodeInstance& node = *w.find_node(id);
    const FunctionSchema& schema = r.lookup(node.type_name);
    ParamMap params = resolve_params(schema, node.params).values;

    std::map<std::string, Artifact> inputs;
    for (const auto& e : w.incoming_flows(id)) {
      const Artifact* upstream = trace.output(e.src.node_id, e.src.port_name);
      if (!upstream) {
        throw Error("scheduler fed '" + id + "' before its input " + e.src.node_id + "." +
                    e.src.port_name);
      }
      inputs.emplace(e.dst.port_name, *upstream);
    }

    std::optional<std::uint64_t> seed;
    if (auto it = seeds.find(id); it != seeds.end()) seed = it->second;

    std::vector<Artifact> produced;
    try {
      produced = backend.run_node(schema, params, inputs, seed);
    } catch (const NodeFailure& failure) {
      trace.status = RunStatus::Failed;
      trace.failure = NodeFailureInfo{id, failure.what()};
      return trace;
    }

    if (produced.size() != schema.outputs.size()) {
      throw Error("backend returned " + std::to_string(produced.size()) + " artifacts for '" +
                  schema.type_name + "', expected " + std::to_string(schema.outputs.size()));
    }
    for (std::size_t i = 0; i < produced.size(); ++i) {
      if (produced[i].token.empty()) throw Error("backend produced an empty artifact token");
      if (!compatible(produced[i].modality, schema.outputs[i].modality)) {
        throw Error("backend produced modality " + std::string(to_string(produced[i].modality)) +
                    " for output '" + schema.outputs[i].name + "' of '" + schema.type_name + "'");
      }
      trace.outputs[{id, schema.outputs[i].name}] = produced[i];
    }
  }
  return trace;
}

}  // namespace aflow
