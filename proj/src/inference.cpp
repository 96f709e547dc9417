#include "aflow/inference.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "aflow/embedding.hpp"
#include "aflow/validator.hpp"

namespace aflow {

namespace fs = std::filesystem;

ScriptedLm::ScriptedLm(std::vector<std::string> responses) : responses_(std::move(responses)) {}

std::string ScriptedLm::complete(const std::string& system_prompt,
                                 const std::string& user_prompt) {
  std::lock_guard<std::mutex> lock(mutex_);
  recorded_.push_back(RecordedPrompt{system_prompt, user_prompt});
  if (next_ >= responses_.size()) {
    throw LmError("script exhausted after " + std::to_string(responses_.size()) + " responses");
  }
  return responses_[next_++];
}

std::vector<float> ScriptedLm::embed(std::string_view text) { return stub_embedding(text); }

std::vector<ScriptedLm::RecordedPrompt> ScriptedLm::recorded() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return recorded_;
}

std::size_t ScriptedLm::responses_consumed() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return next_;
}

void ReferenceStore::add(Reference ref) {
  if (!entries_.empty() && ref.embedding.size() != entries_.front().embedding.size()) {
    throw InvalidValue("reference '" + ref.name + "' embedding dimension " +
                       std::to_string(ref.embedding.size()) + " != " +
                       std::to_string(entries_.front().embedding.size()));
  }
  entries_.push_back(std::move(ref));
}

namespace {

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidValue("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::optional<std::vector<float>> read_embedding_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  in.seekg(0, std::ios::end);
  auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  if (bytes % sizeof(float) != 0) return std::nullopt;
  std::vector<float> v(bytes / sizeof(float));
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
  return v;
}

}  // namespace

ReferenceStore load_reference_store(const std::string& dir, LmBackend& embedder,
                                    const Registry& r) {
  if (!fs::is_directory(dir)) throw InvalidValue("reference store '" + dir + "' is not a directory");

  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const fs::path& p = entry.path();
    if (p.extension() == ".adl") names.push_back(p.stem().string());
  }
  std::sort(names.begin(), names.end());

  ReferenceStore store;
  for (const auto& name : names) {
    fs::path base = fs::path(dir) / name;
    fs::path task_path = base;
    task_path += ".task.txt";
    if (!fs::exists(task_path)) {
      throw InvalidValue("reference '" + name + "' has no .task.txt");
    }
    Reference ref;
    ref.name = name;
    ref.task_text = read_text_file(task_path);

    ParseOutcome outcome = parse(read_text_file(base.string() + ".adl"), SyntaxStyle::declarative);
    if (!outcome.ok()) throw InvalidValue("reference '" + name + "' does not parse");
    if (!is_executable(check(*outcome.workflow, r))) {
      throw InvalidValue("reference '" + name + "' does not validate against the catalog");
    }
    ref.workflow = std::move(*outcome.workflow);

    if (auto cached = read_embedding_file(base.string() + ".emb")) {
      ref.embedding = std::move(*cached);
    } else {
      ref.embedding = embedder.embed(ref.task_text);
    }
    store.add(std::move(ref));
  }
  return store;
}

void save_embedding_cache(const ReferenceStore& store, const std::string& dir) {
  for (const auto& ref : store.entries()) {
    fs::path path = fs::path(dir) / (ref.name + ".emb");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidValue("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(ref.embedding.data()),
              static_cast<std::streamsize>(ref.embedding.size() * sizeof(float)));
  }
}

std::vector<const Reference*> retrieve_references(const ReferenceStore& store,
                                                  const TaskSpec& task, LmBackend& lm, int k) {
  if (store.empty()) throw EmptyStore("reference store is empty");
  if (k < 1) throw InvalidValue("k must be at least 1");

  std::vector<float> query = lm.embed(task.description);
  struct Scored {
    double similarity;
    std::size_t index;
  };
  std::vector<Scored> scored;
  scored.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    scored.push_back({cosine_similarity(query, store.entries()[i].embedding), i});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return a.similarity > b.similarity;  // stable: ties keep entry order
  });

  std::vector<const Reference*> out;
  for (std::size_t i = 0; i < scored.size() && i < static_cast<std::size_t>(k); ++i) {
    out.push_back(&store.entries()[scored[i].index]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prompts

std::string syntax_summary(SyntaxStyle style) {
  std::string head = "Syntax reference (" + std::string(to_string(style)) + "):\n";
  switch (style) {
    case SyntaxStyle::declarative:
      return head +
             "  workflow { node <id> = <Type>(<param>=<value>, ...); ... "
             "<src>.<PORT> -> <dst>.<port>; ... }\n"
             "  Node declarations come first, then one arrow statement per connection.\n"
             "  Example:\n"
             "  workflow {\n"
             "    node ld = LoadImage(path=\"a.png\");\n"
             "    node enc = VAEEncode();\n"
             "    ld.IMAGE -> enc.pixels;\n"
             "  }\n";
    case SyntaxStyle::dataflow:
      return head +
             "  <id> = <Type>(<param>=<value>, ..., <inputPort>=<srcId>.<srcPort>, ...);\n"
             "  Statements must appear in dependency order; port arguments wire the graph.\n"
             "  Example:\n"
             "  ld = LoadImage(path=\"a.png\");\n"
             "  enc = VAEEncode(pixels=ld.IMAGE);\n";
    case SyntaxStyle::pseudo_natural:
      return head +
             "  make <Type> as <id>.   set <id> <param> to <value>.   "
             "feed <srcId> <PORT> into <dstId> <port>.\n"
             "  One sentence per statement, each ending with a period.\n"
             "  Example:\n"
             "  make LoadImage as ld.\n"
             "  set ld path to \"a.png\".\n"
             "  make VAEEncode as enc.\n"
             "  feed ld IMAGE into enc pixels.\n";
  }
  return head;
}

std::string catalog_summary(const Registry& r) {
  std::string out = "Available functions (name, inputs -> outputs, params):\n";
  for (const auto& name : r.type_names()) {
    const FunctionSchema& s = *r.find(name);
    out += "  " + name + "(";
    for (std::size_t i = 0; i < s.inputs.size(); ++i) {
      if (i) out += ", ";
      out += s.inputs[i].name + (s.inputs[i].required ? ":" : "?:") +
             std::string(to_string(s.inputs[i].modality));
    }
    out += ") -> (";
    for (std::size_t i = 0; i < s.outputs.size(); ++i) {
      if (i) out += ", ";
      out += s.outputs[i].name + ":" + std::string(to_string(s.outputs[i].modality));
    }
    out += ")";
    if (!s.params.empty()) {
      out += " params: ";
      for (std::size_t i = 0; i < s.params.size(); ++i) {
        if (i) out += ", ";
        const ParamSpec& p = s.params[i];
        out += p.name + ":" + std::string(to_string(p.kind));
        if (p.range) {
          std::ostringstream os;
          os << "[" << p.range->first << ".." << p.range->second << "]";
          out += os.str();
        }
        if (!p.choices.empty()) {
          out += "{";
          for (std::size_t j = 0; j < p.choices.size(); ++j) {
            if (j) out += "|";
            out += p.choices[j];
          }
          out += "}";
        }
        if (p.required) out += "!";
      }
    }
    out += "\n";
  }
  return out;
}

std::string extract_candidate(const std::string& response) {
  std::size_t open = response.find("```");
  if (open == std::string::npos) {
    // No fence: the whole response is the candidate.
    std::size_t begin = response.find_first_not_of(" \t\r\n");
    std::size_t end = response.find_last_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    return response.substr(begin, end - begin + 1);
  }
  std::size_t body = response.find('\n', open);
  if (body == std::string::npos) return {};
  ++body;
  std::size_t close = response.find("```", body);
  if (close == std::string::npos) close = response.size();
  return response.substr(body, close - body);
}

namespace {

std::string role_prompt() {
  return "You are a workflow compiler assistant. You translate generative task descriptions "
         "into programs over a fixed function catalog. Respond with exactly one fenced code "
         "block containing the program and nothing else.";
}

std::string task_block(const TaskSpec& task) {
  std::string out = "Task inputs:\n";
  if (task.inputs.empty()) out += "  (none)\n";
  for (const auto& in : task.inputs) {
    out += "  " + in.name + " : " + std::string(to_string(in.modality)) + " @ " + in.uri + "\n";
  }
  out += "Task description: " + task.description + "\n";
  if (!task.key_functions.empty()) {
    out += "Key functions to use: ";
    for (std::size_t i = 0; i < task.key_functions.size(); ++i) {
      if (i) out += ", ";
      out += task.key_functions[i];
    }
    out += "\n";
  }
  return out;
}

std::string references_block(std::span<const Reference* const> refs, SyntaxStyle style) {
  std::string out = "Reference programs (" + std::to_string(refs.size()) + "):\n";
  for (const Reference* ref : refs) {
    out += "--- task: " + ref->task_text + "\n```\n" + emit(ref->workflow, style) + "```\n";
  }
  return out;
}

std::string common_context(const TaskSpec& task, const Registry& constraints,
                           std::span<const Reference* const> refs) {
  return syntax_summary(task.syntax) + "\n" + catalog_summary(constraints) + "\n" +
         references_block(refs, task.syntax) + "\n" + task_block(task);
}

LmCall run_lm(const std::string& stage, const std::string& system, const std::string& user,
              LmBackend& lm) {
  LmCall call{stage, system, user, {}};
  call.response = lm.complete(system, user);
  if (call.response.empty()) throw EmptyResponse("language model returned an empty response");
  return call;
}

Diagnostic warning(std::string msg, Location loc = Location::none()) {
  return Diagnostic{ErrorCategory::ConnectionError, Severity::Warning, std::move(loc),
                    std::move(msg)};
}

}  // namespace

StageResult infer_components(const TaskSpec& task, const Registry& constraints,
                             std::span<const Reference* const> refs, LmBackend& lm) {
  std::string user =
      common_context(task, constraints, refs) +
      "\nDeclare the nodes this task needs: function instances with their parameters, in the "
      "syntax above. Do NOT connect anything yet; output node declarations only.";
  StageResult result;
  result.call = run_lm("components", role_prompt(), user, lm);
  result.candidate_text = extract_candidate(result.call.response);
  result.outcome = parse(result.candidate_text, task.syntax);

  if (result.outcome.workflow && result.outcome.workflow->edge_count() > 0) {
    Workflow nodes_only;
    for (const auto& n : result.outcome.workflow->nodes()) {
      nodes_only.add_node(n.id, n.type_name, n.params);
    }
    result.outcome.workflow = std::move(nodes_only);
    result.stage_diagnostics.push_back(
        warning("draft contained connection statements; they were ignored"));
  }
  return result;
}

StageResult infer_topology(const TaskSpec& task, const Registry& constraints,
                           const Workflow& draft_nodes,
                           std::span<const Reference* const> refs, LmBackend& lm) {
  if (draft_nodes.node_count() == 0) {
    throw PreconditionViolated("topology stage needs at least one draft node");
  }
  std::string user = common_context(task, constraints, refs) +
                     "\nThe node set below is fixed. Produce the complete program: restate "
                     "exactly these nodes and add the connections between their ports. Do not "
                     "add or remove nodes.\n```\n" +
                     emit(draft_nodes, task.syntax) + "```";
  StageResult result;
  result.call = run_lm("topology", role_prompt(), user, lm);
  result.candidate_text = extract_candidate(result.call.response);
  result.outcome = parse(result.candidate_text, task.syntax);
  if (!result.outcome.workflow) return result;

  // Merge: nodes (and parameters) come from stage one, edges from stage two.
  const Workflow& response_wf = *result.outcome.workflow;
  Workflow merged;
  for (const auto& n : draft_nodes.nodes()) merged.add_node(n.id, n.type_name, n.params);
  for (const auto& n : response_wf.nodes()) {
    if (!draft_nodes.has_node(n.id)) {
      result.stage_diagnostics.push_back(warning(
          "extraneous node '" + n.id + "' dropped; the topology stage may not add nodes",
          Location::at_node(n.id)));
    }
  }
  for (const auto& e : response_wf.edges()) {
    if (!merged.has_node(e.src.node_id) || !merged.has_node(e.dst.node_id)) {
      result.stage_diagnostics.push_back(Diagnostic{
          ErrorCategory::ConnectionError, Severity::Error,
          Location::at_port(e.src.node_id, e.src.port_name),
          "edge references a node outside the fixed set: " + e.src.node_id + "." +
              e.src.port_name + " -> " + e.dst.node_id + "." + e.dst.port_name});
      continue;
    }
    if (merged.edge_into(e.dst.node_id, e.dst.port_name)) {
      result.stage_diagnostics.push_back(Diagnostic{
          ErrorCategory::ConnectionError, Severity::Error,
          Location::at_port(e.dst.node_id, e.dst.port_name),
          "input '" + e.dst.node_id + "." + e.dst.port_name + "' already receives a flow"});
      continue;
    }
    merged.connect(e.src.node_id, e.src.port_name, e.dst.node_id, e.dst.port_name);
  }
  result.outcome.workflow = std::move(merged);
  return result;
}

namespace {

std::string serialize_for_prompt(std::span<const Diagnostic> diags) {
  std::string out;
  for (const auto& d : diags) {
    if (d.severity == Severity::Error) out += "  - " + diagnostic_to_text(d) + "\n";
  }
  return out;
}

// Validation plus the optional execution leg; fills the record's
// diagnostics, workflow text and executable flag.
void settle_candidate(CandidateRecord& record, const Registry& constraints,
                      const PipelineOptions& options, InferenceSession& session) {
  if (record.workflow) {
    auto diags = check(*record.workflow, constraints);
    record.diagnostics.insert(record.diagnostics.end(), diags.begin(), diags.end());
    record.text = emit(*record.workflow, session.task.syntax);
  }
  sort_diagnostics(record.diagnostics);
  record.validated = record.workflow.has_value() && is_executable(record.diagnostics);
  record.executable = record.validated;

  if (record.executable && options.execute_backend) {
    ExecutionTrace trace =
        execute(*record.workflow, constraints, *options.execute_backend);
    if (trace.status == RunStatus::Failed) {
      // Runtime failures re-enter refinement; the category is a heuristic
      // mapping of the failure message.
      std::string msg = trace.failure ? trace.failure->message : "execution failed";
      std::string node = trace.failure ? trace.failure->node_id : "";
      ErrorCategory cat = msg.find("param") != std::string::npos
                              ? ErrorCategory::InvalidParameter
                              : ErrorCategory::ConnectionError;
      record.diagnostics.push_back(Diagnostic{cat, Severity::Error, Location::at_node(node),
                                              "execution failed at '" + node + "': " + msg});
      record.executable = false;
    } else {
      session.trace = std::move(trace);
    }
  }
}

CandidateRecord candidate_from_stage(StageResult&& stage) {
  CandidateRecord record;
  record.stage = stage.call.stage;
  record.text = stage.candidate_text;
  record.workflow = std::move(stage.outcome.workflow);
  record.diagnostics = std::move(stage.outcome.diagnostics);
  record.diagnostics.insert(record.diagnostics.end(), stage.stage_diagnostics.begin(),
                            stage.stage_diagnostics.end());
  return record;
}

}  // namespace

void refine(InferenceSession& session, const Registry& constraints,
            std::span<const Reference* const> refs, LmBackend& lm) {
  if (session.candidates.empty() || session.candidates.back().executable) {
    throw PreconditionViolated("refine needs a failing candidate");
  }
  if (session.refinements_used >= session.iteration_limit) {
    throw IterationLimitReached("refinement limit of " +
                                std::to_string(session.iteration_limit) + " reached");
  }

  const CandidateRecord& last = session.candidates.back();
  std::string user = common_context(session.task, constraints, refs) +
                     "\nThe candidate program below failed validation.\nCandidate:\n```\n" +
                     last.text + "\n```\nProblems:\n" + serialize_for_prompt(last.diagnostics) +
                     "Produce a corrected complete program in the same syntax.";
  LmCall call = run_lm("refine", role_prompt(), user, lm);
  session.calls.push_back(call);
  ++session.refinements_used;

  CandidateRecord record;
  record.stage = "refine";
  record.text = extract_candidate(call.response);
  ParseOutcome outcome = parse(record.text, session.task.syntax);
  record.workflow = std::move(outcome.workflow);
  record.diagnostics = std::move(outcome.diagnostics);
  session.candidates.push_back(std::move(record));
}

InferenceSession run_pipeline(const TaskSpec& task, const Registry& constraints,
                              const ReferenceStore& store, LmBackend& lm,
                              const PipelineOptions& options) {
  InferenceSession session;
  session.task = task;
  session.iteration_limit = options.allow_refinement ? options.iteration_limit : 0;

  auto refs = retrieve_references(store, task, lm, options.k);
  for (const Reference* r : refs) session.retrieved.push_back(r->name);

  if (options.two_stage) {
    StageResult draft = infer_components(task, constraints, refs, lm);
    session.calls.push_back(draft.call);
    if (draft.outcome.workflow && draft.outcome.workflow->node_count() > 0) {
      for (const auto& n : draft.outcome.workflow->nodes()) {
        session.psi1_nodes.emplace_back(n.id, n.type_name);
      }
      std::sort(session.psi1_nodes.begin(), session.psi1_nodes.end());
      StageResult topo = infer_topology(task, constraints, *draft.outcome.workflow, refs, lm);
      session.calls.push_back(topo.call);
      session.candidates.push_back(candidate_from_stage(std::move(topo)));
    } else {
      // Unusable draft: record it as the first candidate and let the
      // refinement loop repair from the raw text.
      CandidateRecord record = candidate_from_stage(std::move(draft));
      if (record.workflow && record.workflow->node_count() == 0) {
        record.workflow.reset();
        record.diagnostics.push_back(Diagnostic{ErrorCategory::InvalidFormat, Severity::Error,
                                                Location::none(), "draft declared no nodes"});
      }
      session.candidates.push_back(std::move(record));
    }
  } else {
    std::string user = common_context(task, constraints, refs) +
                       "\nProduce the complete program for this task in the syntax above: all "
                       "node declarations with parameters and all connections.";
    LmCall call = run_lm("single", role_prompt(), user, lm);
    session.calls.push_back(call);
    CandidateRecord record;
    record.stage = "single";
    record.text = extract_candidate(call.response);
    ParseOutcome outcome = parse(record.text, task.syntax);
    record.workflow = std::move(outcome.workflow);
    record.diagnostics = std::move(outcome.diagnostics);
    session.candidates.push_back(std::move(record));
  }

  settle_candidate(session.candidates.back(), constraints, options, session);

  while (!session.candidates.back().executable &&
         session.refinements_used < session.iteration_limit) {
    refine(session, constraints, refs, lm);
    settle_candidate(session.candidates.back(), constraints, options, session);
  }

  if (session.candidates.back().executable) {
    session.final = session.candidates.back().workflow;
  }
  return session;
}

std::string session_to_json(const InferenceSession& s, int indent) {
  nlohmann::ordered_json doc;
  doc["task"] = {{"description", s.task.description},
                 {"syntax", std::string(to_string(s.task.syntax))}};
  doc["task"]["inputs"] = nlohmann::ordered_json::array();
  for (const auto& in : s.task.inputs) {
    doc["task"]["inputs"].push_back({{"name", in.name},
                                     {"modality", std::string(to_string(in.modality))},
                                     {"uri", in.uri}});
  }
  doc["task"]["key_functions"] = s.task.key_functions;
  doc["iteration_limit"] = s.iteration_limit;
  doc["retrieved"] = s.retrieved;
  doc["calls"] = nlohmann::ordered_json::array();
  for (const auto& c : s.calls) {
    doc["calls"].push_back({{"stage", c.stage},
                            {"system", c.system},
                            {"user", c.user},
                            {"response", c.response}});
  }
  doc["candidates"] = nlohmann::ordered_json::array();
  for (const auto& c : s.candidates) {
    nlohmann::ordered_json jc;
    jc["stage"] = c.stage;
    jc["text"] = c.text;
    jc["executable"] = c.executable;
    jc["diagnostics"] = nlohmann::ordered_json::parse(diagnostics_to_json(c.diagnostics, -1));
    doc["candidates"].push_back(std::move(jc));
  }
  doc["refinements_used"] = s.refinements_used;
  doc["succeeded"] = s.succeeded();
  doc["final_program"] =
      s.final ? nlohmann::ordered_json(emit(*s.final, s.task.syntax)) : nlohmann::ordered_json();
  return doc.dump(indent) + "\n";
}

LiveLmConfig live_lm_config_from_env() {
  LiveLmConfig config;
  auto get = [](const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string{};
  };
  config.base_url = get("AFLOW_LM_URL");
  config.model = get("AFLOW_LM_MODEL");
  config.api_key = get("AFLOW_LM_KEY");
  config.embed_model = get("AFLOW_EMBED_MODEL");
  return config;
}

}  // namespace aflow
