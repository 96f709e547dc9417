#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aflow/executor.hpp"
#include "aflow/inference.hpp"

namespace aflow {

enum class OracleKind { ValidatesCleanly, ExecutesWithSim, GoldenEquivalence };

std::string_view to_string(OracleKind k);
std::optional<OracleKind> oracle_kind_from_string(std::string_view s);

// One benchmark task: the spec to hand the pipeline plus the oracle deciding
// "resolved". A case that failed to load carries load_error and scores as
// errored without aborting the suite.
struct TaskCase {
  std::string id;
  std::string category;
  TaskSpec spec;
  OracleKind oracle = OracleKind::ValidatesCleanly;
  std::optional<Workflow> golden;  // GoldenEquivalence only; validates cleanly
  std::optional<std::string> load_error;
};

struct CaseOutcome {
  std::string id;
  std::string category;
  SyntaxStyle syntax = SyntaxStyle::declarative;
  bool errored = false;
  std::string error_message;
  bool compiled = false;
  bool executed = false;
  bool resolved = false;
  // Error-severity diagnostics over every candidate of the session.
  std::map<ErrorCategory, int> error_counts;
  int iterations = 0;   // candidates produced
  int refinements = 0;  // repair rounds used
};

struct SuiteReport {
  std::vector<CaseOutcome> rows;  // sorted by case id
  // Aggregates are empty (reported as null) for an empty suite.
  std::optional<double> pass1_compile;
  std::optional<double> pass1_execute;
  std::optional<double> resolve_rate;
  std::map<std::string, double> resolve_by_category;
};

// Recomputes every aggregate from the rows and compares.
bool aggregates_consistent(const SuiteReport& report);

using LmFactory = std::function<std::unique_ptr<LmBackend>(const TaskCase&)>;

struct RunSuiteOptions {
  PipelineOptions pipeline;
  std::optional<SyntaxStyle> syntax_override;
};

// Runs the pipeline once per case (single-run pass semantics), recording
// compile, execute and resolve outcomes. Individual failures never abort the
// suite. `backend` drives the execution leg; rows come back sorted by id.
SuiteReport run_suite(const std::vector<TaskCase>& cases, const Registry& registry,
                      const ReferenceStore& store, const LmFactory& lm_factory, Backend& backend,
                      const RunSuiteOptions& options = {});

std::string report_to_json(const SuiteReport& report, int indent = 2);
std::string report_to_table(const SuiteReport& report);
std::string report_to_csv(const SuiteReport& report);

constexpr int kErrorCategoryCount = 6;

struct ErrorHistogram {
  // counts[style][category]
  std::map<SyntaxStyle, std::array<int, kErrorCategoryCount>> counts;
  int total() const;
};

// Category-by-syntax error table over reports that ran the same case set.
// Throws MismatchedCaseSets when the id sets differ.
ErrorHistogram error_histogram(
    const std::vector<std::pair<SyntaxStyle, const SuiteReport*>>& reports);

std::string histogram_to_table(const ErrorHistogram& h);
std::string histogram_to_json(const ErrorHistogram& h, int indent = 2);

// Case file schema:
//   {"id","category","description","inputs":[{"name","modality","uri"}],
//    "syntax","key_functions"?,"oracle":{"kind","golden"?}}
// `golden` is a declarative program path relative to the case file.
TaskCase load_task_case(const std::string& json_text, const std::string& base_dir,
                        const Registry& r);

// Loads every *.json in `dir` (sorted); malformed files become cases with
// load_error set. A sibling `scripts/<id>.json` (array of responses) feeds
// the scripted backend in `load_suite_scripts`.
std::vector<TaskCase> load_suite_dir(const std::string& dir, const Registry& r);
std::map<std::string, std::vector<std::string>> load_suite_scripts(const std::string& dir);

}  // namespace aflow
