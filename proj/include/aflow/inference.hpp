#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aflow/diagnostics.hpp"
#include "aflow/executor.hpp"
#include "aflow/ir.hpp"
#include "aflow/registry.hpp"
#include "aflow/syntax.hpp"

namespace aflow {

struct TaskInput {
  std::string name;
  Modality modality = Modality::any;
  std::string uri;
};

// One task to synthesize: the description, the input manifest, the target
// syntax and optional caller-pinned function types.
struct TaskSpec {
  std::string description;
  std::vector<TaskInput> inputs;
  SyntaxStyle syntax = SyntaxStyle::declarative;
  std::vector<std::string> key_functions;
};

// Language-model interface. complete() must either return text or throw
// LmError; silent empties are not allowed.
class LmBackend {
 public:
  virtual ~LmBackend() = default;
  virtual std::string complete(const std::string& system_prompt,
                               const std::string& user_prompt) = 0;
  virtual std::vector<float> embed(std::string_view text) = 0;
};

// Plays back a fixed response sequence and records every prompt; embeddings
// come from the deterministic stub. Exhausting the script raises LmError.
// Calls are serialized internally.
class ScriptedLm final : public LmBackend {
 public:
  explicit ScriptedLm(std::vector<std::string> responses);

  std::string complete(const std::string& system_prompt, const std::string& user_prompt) override;
  std::vector<float> embed(std::string_view text) override;

  struct RecordedPrompt {
    std::string system;
    std::string user;
  };
  std::vector<RecordedPrompt> recorded() const;
  std::size_t responses_consumed() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
  std::vector<RecordedPrompt> recorded_;
};

struct Reference {
  std::string name;
  std::string task_text;
  Workflow workflow;
  std::vector<float> embedding;
};

// In-memory retrieval corpus. All embeddings share one dimension and every
// entry's workflow has been validated by the loader.
class ReferenceStore {
 public:
  void add(Reference ref);
  const std::vector<Reference>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<Reference> entries_;
};

// Loads `<name>.task.txt` + `<name>.adl` pairs (declarative programs) from a
// directory, in name order. A sibling `<name>.emb` (raw little-endian f32)
// is used as the embedding when present; otherwise `embedder` is asked.
// Entries whose workflow fails validation are rejected with InvalidValue.
ReferenceStore load_reference_store(const std::string& dir, LmBackend& embedder,
                                    const Registry& r);

// Writes `<name>.emb` caches for every entry.
void save_embedding_cache(const ReferenceStore& store, const std::string& dir);

// Top-k entries by cosine similarity against the task description embedding;
// ties keep entry order. Throws EmptyStore.
std::vector<const Reference*> retrieve_references(const ReferenceStore& store,
                                                  const TaskSpec& task, LmBackend& lm, int k = 3);

// Prompt building blocks, exposed for tests and transcript readers.
std::string syntax_summary(SyntaxStyle style);
std::string catalog_summary(const Registry& r);
// First fenced code block of an LM response, or the trimmed response when no
// fence is present.
std::string extract_candidate(const std::string& response);

struct LmCall {
  std::string stage;  // "components" | "topology" | "single" | "refine"
  std::string system;
  std::string user;
  std::string response;
};

// One synthesis attempt: the candidate program text, its parse, the merged
// diagnostics (parse, stage contract, validation, execution) and the
// resulting workflow when the text was structurally sound.
struct CandidateRecord {
  std::string stage;
  std::string text;
  std::optional<Workflow> workflow;
  std::vector<Diagnostic> diagnostics;
  // Parse and validation produced no errors.
  bool validated = false;
  // validated, and the execution leg (when enabled) completed.
  bool executable = false;
};

struct InferenceSession {
  TaskSpec task;
  int iteration_limit = 3;
  std::vector<std::string> retrieved;            // names of retrieved references
  std::vector<std::pair<std::string, std::string>> psi1_nodes;  // (id, type) multiset
  std::vector<LmCall> calls;
  std::vector<CandidateRecord> candidates;
  std::optional<Workflow> final;
  std::optional<ExecutionTrace> trace;
  int refinements_used = 0;

  bool succeeded() const { return final.has_value(); }
};

std::string session_to_json(const InferenceSession& s, int indent = 2);

struct StageResult {
  LmCall call;
  std::string candidate_text;
  ParseOutcome outcome;
  std::vector<Diagnostic> stage_diagnostics;
};

// Stage one: ask for node declarations only. The parsed node set may
// reference unknown types; flagging them is the validator's and the
// refinement loop's job. Draft edges are ignored with a warning.
StageResult infer_components(const TaskSpec& task, const Registry& constraints,
                             std::span<const Reference* const> refs, LmBackend& lm);

// Stage two: ask for connections over the fixed node set and merge. The node
// multiset of `draft_nodes` is authoritative: extraneous declarations are
// dropped with a warning, edges touching unknown ids become ConnectionError.
StageResult infer_topology(const TaskSpec& task, const Registry& constraints,
                           const Workflow& draft_nodes,
                           std::span<const Reference* const> refs, LmBackend& lm);

// One application of the repair operator: feeds the failing candidate and
// its diagnostics back to the model and appends the revised attempt to the
// session. Requires a failing last candidate and headroom under the
// iteration limit (PreconditionViolated / IterationLimitReached otherwise).
void refine(InferenceSession& session, const Registry& constraints,
            std::span<const Reference* const> refs, LmBackend& lm);

struct PipelineOptions {
  int k = 3;
  int iteration_limit = 3;
  bool two_stage = true;
  bool allow_refinement = true;
  // When set, executable candidates are run and execution failures feed the
  // refinement loop as diagnostics.
  Backend* execute_backend = nullptr;
};

// Full pipeline: retrieve, infer components, infer topology, validate, and
// refine until executable or the limit is reached. A session that ends
// without a workflow is a normal failed session, not an exception.
InferenceSession run_pipeline(const TaskSpec& task, const Registry& constraints,
                              const ReferenceStore& store, LmBackend& lm,
                              const PipelineOptions& options = {});

// OpenAI-compatible chat/embeddings wire format.
struct LiveLmConfig {
  std::string base_url;    // AFLOW_LM_URL
  std::string model;       // AFLOW_LM_MODEL
  std::string api_key;     // AFLOW_LM_KEY
  std::string embed_model; // AFLOW_EMBED_MODEL
};

LiveLmConfig live_lm_config_from_env();
std::unique_ptr<LmBackend> live_lm_backend(LiveLmConfig config);

}  // namespace aflow
