#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aflow/ir.hpp"
#include "aflow/registry.hpp"

namespace aflow {

// A value flowing on an edge: in simulated mode the token is a content
// fingerprint; in live mode it references a produced asset.
struct Artifact {
  Modality modality = Modality::any;
  std::string token;

  bool operator==(const Artifact&) const = default;
};

enum class RunStatus { Completed, Failed };

struct NodeFailureInfo {
  std::string node_id;
  std::string message;
};

struct ExecutionTrace {
  std::vector<std::string> order;  // scheduled order; covers all nodes
  std::map<std::pair<std::string, std::string>, Artifact> outputs;  // (node, port)
  RunStatus status = RunStatus::Completed;
  std::optional<NodeFailureInfo> failure;

  const Artifact* output(std::string_view node, std::string_view port) const;
};

std::string trace_to_json(const ExecutionTrace& t, int indent = 2);

// Raised by backends when one node fails; execute() turns it into a Failed
// trace instead of propagating.
class NodeFailure : public Error {
 public:
  using Error::Error;
};

// Runs one node. Must return exactly one Artifact per declared output port,
// in schema output order, with the declared modalities. Implementations must
// be safe for concurrent calls or serialize internally.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::vector<Artifact> run_node(const FunctionSchema& schema,
                                         const ParamMap& resolved_params,
                                         const std::map<std::string, Artifact>& inputs,
                                         std::optional<std::uint64_t> seed) = 0;
};

// Content fingerprint of one node evaluation: a stable 64-bit hash of the
// type name, canonically rendered parameters, the sorted input tokens, the
// output port name and the optional seed. This is the normative token rule;
// the simulated backend and any oracle must agree on it.
std::string fingerprint_token(const std::string& type_name, const ParamMap& resolved_params,
                              std::vector<std::string> input_tokens,
                              const std::string& port_name, std::optional<std::uint64_t> seed);

// Deterministic hermetic backend: every output is a fingerprint Artifact of
// the declared modality.
std::unique_ptr<Backend> simulated_backend();

using SeedMap = std::map<std::string, std::uint64_t>;

// Schedules the workflow in topological order, feeding each node the
// artifacts resolved from its incoming flows and its resolved parameters.
// The first node failure aborts with a Failed trace. Throws
// PreconditionViolated unless check(w, r) is executable.
ExecutionTrace execute(const Workflow& w, const Registry& r, Backend& backend,
                       const SeedMap& seeds = {});

}  // namespace aflow
