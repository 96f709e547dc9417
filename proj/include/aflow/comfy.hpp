#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aflow/diagnostics.hpp"
#include "aflow/executor.hpp"
#include "aflow/ir.hpp"
#include "aflow/registry.hpp"

namespace aflow {

// ComfyUI "API prompt" JSON: a map from node id to
//   {"class_type": <type>, "inputs": {<param>: literal..., <port>: [src, index]}}
// Parameters are exported fully resolved (defaults filled) so the prompt is
// executable as-is; link indices follow schema output order. Requires the
// workflow to be executable under `r`.
std::string export_comfy(const Workflow& w, const Registry& r, int indent = 2);

struct ImportResult {
  Workflow workflow;
  // Warnings for literal fields that match neither a parameter nor an input
  // port; such fields are preserved under metadata key
  // "comfy.extra.<node>.<field>".
  std::vector<Diagnostic> diagnostics;
};

// Inverse of export_comfy, also able to ingest foreign prompts: non-identifier
// node keys are renamed ("3" becomes "n3"), link indices map to port names via
// the source schema. Unknown class_types are kept for the validator to flag,
// but links *from* them cannot be index-resolved and raise ImportError.
ImportResult import_comfy(const std::string& doc, const Registry& r);

struct LiveOptions {
  std::string client_id = "aflow";
  int poll_interval_ms = 1000;
  int timeout_ms = 600000;
  // Scheduled order of the submitted workflow, when the caller knows it;
  // copied into the returned trace.
  std::vector<std::string> order;
};

// Submits an API prompt to a ComfyUI server (POST /prompt), polls
// GET /history/<id> until the job settles, and maps the result onto an
// ExecutionTrace. Remote node exceptions become a Failed trace; transport
// problems throw NetworkError and the deadline throws TimeoutError.
ExecutionTrace submit_live(const std::string& prompt_json, const std::string& endpoint,
                           const LiveOptions& options = {});

// Maps a ComfyUI /object_info document onto a catalog. Entries whose class
// names are not identifiers are skipped and counted in `skipped`.
Registry catalog_from_object_info(const std::string& object_info_json, std::string version,
                                  int* skipped = nullptr);

// Fetches /object_info from a live server and converts it. Throws
// NetworkError when the endpoint is unreachable.
Registry sync_catalog(const std::string& endpoint, std::string version);

}  // namespace aflow
