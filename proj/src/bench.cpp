#include "aflow/bench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "aflow/validator.hpp"

namespace aflow {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

const char* kOracleNames[] = {"validates_cleanly", "executes_with_sim", "golden_equivalence"};

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidValue("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::optional<double> mean_of(const std::vector<CaseOutcome>& rows,
                              bool (*pick)(const CaseOutcome&)) {
  if (rows.empty()) return std::nullopt;
  double hits = 0;
  for (const auto& r : rows) {
    if (pick(r)) ++hits;
  }
  return hits / static_cast<double>(rows.size());
}

void fill_aggregates(SuiteReport& report) {
  report.pass1_compile = mean_of(report.rows, [](const CaseOutcome& r) { return r.compiled; });
  report.pass1_execute = mean_of(report.rows, [](const CaseOutcome& r) { return r.executed; });
  report.resolve_rate = mean_of(report.rows, [](const CaseOutcome& r) { return r.resolved; });
  report.resolve_by_category.clear();
  std::map<std::string, std::pair<int, int>> buckets;  // category -> (resolved, total)
  for (const auto& r : report.rows) {
    auto& [hits, total] = buckets[r.category];
    if (r.resolved) ++hits;
    ++total;
  }
  for (const auto& [category, counts] : buckets) {
    report.resolve_by_category[category] =
        static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
}

}  // namespace

std::string_view to_string(OracleKind k) { return kOracleNames[static_cast<int>(k)]; }

std::optional<OracleKind> oracle_kind_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(OracleKind::GoldenEquivalence); ++i) {
    if (s == kOracleNames[i]) return static_cast<OracleKind>(i);
  }
  return std::nullopt;
}

bool aggregates_consistent(const SuiteReport& report) {
  SuiteReport fresh;
  fresh.rows = report.rows;
  fill_aggregates(fresh);
  return fresh.pass1_compile == report.pass1_compile &&
         fresh.pass1_execute == report.pass1_execute &&
         fresh.resolve_rate == report.resolve_rate &&
         fresh.resolve_by_category == report.resolve_by_category;
}

SuiteReport run_suite(const std::vector<TaskCase>& cases, const Registry& registry,
                      const ReferenceStore& store, const LmFactory& lm_factory, Backend& backend,
                      const RunSuiteOptions& options) {
  SuiteReport report;
  for (const TaskCase& task_case : cases) {
    CaseOutcome row;
    row.id = task_case.id;
    row.category = task_case.category;

    TaskSpec spec = task_case.spec;
    if (options.syntax_override) spec.syntax = *options.syntax_override;
    row.syntax = spec.syntax;

    if (task_case.load_error) {
      row.errored = true;
      row.error_message = *task_case.load_error;
      report.rows.push_back(std::move(row));
      continue;
    }

    PipelineOptions pipeline = options.pipeline;
    pipeline.execute_backend = &backend;

    try {
      auto lm = lm_factory(task_case);
      InferenceSession session = run_pipeline(spec, registry, store, *lm, pipeline);

      const CandidateRecord& last = session.candidates.back();
      row.compiled = last.validated;
      row.executed = session.trace.has_value() &&
                     session.trace->status == RunStatus::Completed;
      row.iterations = static_cast<int>(session.candidates.size());
      row.refinements = session.refinements_used;
      for (const auto& candidate : session.candidates) {
        for (const auto& d : candidate.diagnostics) {
          if (d.severity == Severity::Error) ++row.error_counts[d.category];
        }
      }
      switch (task_case.oracle) {
        case OracleKind::ValidatesCleanly:
          row.resolved = row.compiled;
          break;
        case OracleKind::ExecutesWithSim:
          row.resolved = row.executed;
          break;
        case OracleKind::GoldenEquivalence:
          row.resolved = row.compiled && last.workflow.has_value() &&
                         task_case.golden.has_value() &&
                         canonical_equal(*last.workflow, *task_case.golden);
          break;
      }
    } catch (const Error& e) {
      row.errored = true;
      row.error_message = e.what();
    }
    report.rows.push_back(std::move(row));
  }

  std::sort(report.rows.begin(), report.rows.end(),
            [](const CaseOutcome& a, const CaseOutcome& b) { return a.id < b.id; });
  fill_aggregates(report);
  return report;
}

namespace {

ordered_json aggregate_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

std::string report_to_json(const SuiteReport& report, int indent) {
  ordered_json doc;
  doc["cases"] = ordered_json::array();
  for (const auto& r : report.rows) {
    ordered_json jr;
    jr["id"] = r.id;
    jr["category"] = r.category;
    jr["syntax"] = std::string(to_string(r.syntax));
    jr["errored"] = r.errored;
    if (r.errored) jr["error"] = r.error_message;
    jr["compiled"] = r.compiled;
    jr["executed"] = r.executed;
    jr["resolved"] = r.resolved;
    jr["iterations"] = r.iterations;
    jr["refinements"] = r.refinements;
    jr["errors"] = ordered_json::object();
    for (const auto& [cat, count] : r.error_counts) {
      jr["errors"][std::string(to_string(cat))] = count;
    }
    doc["cases"].push_back(std::move(jr));
  }
  doc["aggregates"] = {{"pass1_compile", aggregate_json(report.pass1_compile)},
                       {"pass1_execute", aggregate_json(report.pass1_execute)},
                       {"resolve_rate", aggregate_json(report.resolve_rate)}};
  doc["aggregates"]["resolve_by_category"] = ordered_json::object();
  for (const auto& [category, rate] : report.resolve_by_category) {
    doc["aggregates"]["resolve_by_category"][category] = rate;
  }
  return doc.dump(indent) + "\n";
}

namespace {

std::string fixed3(std::optional<double> v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

}  // namespace

std::string report_to_table(const SuiteReport& report) {
  std::ostringstream out;
  out << "case                      cat           syntax          C E R iters\n";
  for (const auto& r : report.rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-25s %-13s %-15s %c %c %c %d\n", r.id.c_str(),
                  r.category.c_str(), std::string(to_string(r.syntax)).c_str(),
                  r.errored ? '!' : (r.compiled ? 'y' : '.'), r.executed ? 'y' : '.',
                  r.resolved ? 'y' : '.', r.iterations);
    out << line;
  }
  out << "cases: " << report.rows.size() << "  pass@1 compile: " << fixed3(report.pass1_compile)
      << "  execute: " << fixed3(report.pass1_execute)
      << "  resolve: " << fixed3(report.resolve_rate) << "\n";
  return out.str();
}

std::string report_to_csv(const SuiteReport& report) {
  std::string out = "id,category,syntax,errored,compiled,executed,resolved,iterations,refinements\n";
  for (const auto& r : report.rows) {
    out += r.id + "," + r.category + "," + std::string(to_string(r.syntax)) + "," +
           (r.errored ? "1" : "0") + "," + (r.compiled ? "1" : "0") + "," +
           (r.executed ? "1" : "0") + "," + (r.resolved ? "1" : "0") + "," +
           std::to_string(r.iterations) + "," + std::to_string(r.refinements) + "\n";
  }
  return out;
}

int ErrorHistogram::total() const {
  int sum = 0;
  for (const auto& [style, row] : counts) {
    for (int c : row) sum += c;
  }
  return sum;
}

ErrorHistogram error_histogram(
    const std::vector<std::pair<SyntaxStyle, const SuiteReport*>>& reports) {
  std::optional<std::vector<std::string>> baseline;
  ErrorHistogram hist;
  for (const auto& [style, report] : reports) {
    std::vector<std::string> ids;
    for (const auto& r : report->rows) ids.push_back(r.id);
    std::sort(ids.begin(), ids.end());
    if (!baseline) {
      baseline = ids;
    } else if (*baseline != ids) {
      throw MismatchedCaseSets("histogram inputs ran different case sets");
    }
    auto& row = hist.counts[style];
    row.fill(0);
    for (const auto& r : report->rows) {
      for (const auto& [cat, count] : r.error_counts) {
        row[static_cast<int>(cat)] += count;
      }
    }
  }
  return hist;
}

std::string histogram_to_table(const ErrorHistogram& h) {
  std::ostringstream out;
  out << "category            ";
  for (const auto& [style, _] : h.counts) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%15s", std::string(to_string(style)).c_str());
    out << buf;
  }
  out << "\n";
  for (int c = 0; c < kErrorCategoryCount; ++c) {
    char head[32];
    std::snprintf(head, sizeof head, "%-20s",
                  std::string(to_string(static_cast<ErrorCategory>(c))).c_str());
    out << head;
    for (const auto& [style, row] : h.counts) {
      char cell[24];
      std::snprintf(cell, sizeof cell, "%15d", row[c]);
      out << cell;
    }
    out << "\n";
  }
  out << "total errors: " << h.total() << "\n";
  return out.str();
}

std::string histogram_to_json(const ErrorHistogram& h, int indent) {
  ordered_json doc;
  for (const auto& [style, row] : h.counts) {
    ordered_json jrow;
    for (int c = 0; c < kErrorCategoryCount; ++c) {
      jrow[std::string(to_string(static_cast<ErrorCategory>(c)))] = row[c];
    }
    doc[std::string(to_string(style))] = std::move(jrow);
  }
  doc["total"] = h.total();
  return doc.dump(indent) + "\n";
}

TaskCase load_task_case(const std::string& json_text, const std::string& base_dir,
                        const Registry& r) {
  TaskCase out;
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
    out.id = doc.at("id").get<std::string>();
    out.category = doc.value("category", std::string{"uncategorized"});
    out.spec.description = doc.at("description").get<std::string>();
    if (out.spec.description.empty()) throw InvalidValue("description is empty");

    const ordered_json inputs = doc.value("inputs", ordered_json::array());
    for (const auto& ji : inputs) {
      TaskInput input;
      input.name = ji.at("name").get<std::string>();
      auto m = modality_from_string(ji.at("modality").get<std::string>());
      if (!m) throw InvalidValue("unknown modality '" + ji.at("modality").get<std::string>() + "'");
      input.modality = *m;
      input.uri = ji.value("uri", std::string{});
      out.spec.inputs.push_back(std::move(input));
    }

    auto style = style_from_string(doc.value("syntax", std::string{"declarative"}));
    if (!style) throw InvalidValue("unknown syntax '" + doc.value("syntax", std::string{}) + "'");
    out.spec.syntax = *style;
    for (const auto& kf : doc.value("key_functions", ordered_json::array())) {
      out.spec.key_functions.push_back(kf.get<std::string>());
    }

    const ordered_json oracle = doc.at("oracle");
    auto kind = oracle_kind_from_string(oracle.at("kind").get<std::string>());
    if (!kind) throw InvalidValue("unknown oracle kind '" +
                                  oracle.at("kind").get<std::string>() + "'");
    out.oracle = *kind;
    if (out.oracle == OracleKind::GoldenEquivalence) {
      fs::path golden_path = fs::path(base_dir) / oracle.at("golden").get<std::string>();
      ParseOutcome parsed_golden = parse(read_text_file(golden_path), SyntaxStyle::declarative);
      if (!parsed_golden.ok()) throw InvalidValue("golden does not parse");
      if (!is_executable(check(*parsed_golden.workflow, r))) {
        throw InvalidValue("golden does not validate cleanly");
      }
      out.golden = std::move(*parsed_golden.workflow);
    }
  } catch (const nlohmann::json::exception& e) {
    out.load_error = std::string("malformed case: ") + e.what();
  } catch (const Error& e) {
    out.load_error = e.what();
  }
  return out;
}

std::vector<TaskCase> load_suite_dir(const std::string& dir, const Registry& r) {
  if (!fs::is_directory(dir)) throw InvalidValue("suite '" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<TaskCase> cases;
  for (const auto& file : files) {
    TaskCase c = load_task_case(read_text_file(file), dir, r);
    if (c.id.empty()) c.id = file.stem().string();
    cases.push_back(std::move(c));
  }
  return cases;
}

std::map<std::string, std::vector<std::string>> load_suite_scripts(const std::string& dir) {
  std::map<std::string, std::vector<std::string>> scripts;
  if (!fs::is_directory(dir)) return scripts;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    try {
      auto doc = ordered_json::parse(read_text_file(entry.path()));
      scripts[entry.path().stem().string()] = doc.get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw InvalidValue("script '" + entry.path().string() + "': " + e.what());
    }
  }
  return scripts;
}

}  // namespace aflow
