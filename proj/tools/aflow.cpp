// aflow: validate, convert, run, infer and benchmark workflow programs.
//
// Exit codes: 0 success, 1 task-level failure (invalid program, unresolved
// session), 2 usage/config/IO errors, 3 runtime/backend errors, 4 language
// model errors.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "aflow/bench.hpp"
#include "aflow/comfy.hpp"
#include "aflow/config.hpp"
#include "aflow/executor.hpp"
#include "aflow/inference.hpp"
#include "aflow/syntax.hpp"
#include "aflow/validator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTaskFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitLm = 4;

std::string read_file_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw aflow::ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_or_throw(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw aflow::ConfigError("cannot write '" + path + "'");
  out << content;
}

aflow::SyntaxStyle style_for_file(const std::string& file,
                                  const std::optional<aflow::SyntaxStyle>& flag,
                                  const aflow::CliConfig& config) {
  if (flag) return *flag;
  if (auto s = aflow::style_from_extension(file)) return *s;
  if (config.syntax) return *config.syntax;
  throw aflow::ConfigError("cannot infer syntax of '" + file +
                           "'; pass --syntax or use .adl/.adf/.apn");
}

void print_diagnostics(const std::vector<aflow::Diagnostic>& diags, const std::string& format,
                       bool executable) {
  if (format == "json") {
    nlohmann::ordered_json doc;
    doc["executable"] = executable;
    doc["diagnostics"] =
        nlohmann::ordered_json::parse(aflow::diagnostics_to_json(diags, -1));
    std::cout << doc.dump(2) << "\n";
  } else {
    for (const auto& d : diags) std::cerr << aflow::diagnostic_to_text(d) << "\n";
  }
}

struct SyntaxFlag {
  std::optional<aflow::SyntaxStyle> value;
};

void add_syntax_flag(CLI::App* cmd, SyntaxFlag& flag, const char* name = "--syntax") {
  cmd->add_option_function<std::string>(
         name,
         [&flag](const std::string& s) {
           auto style = aflow::style_from_string(s);
           if (!style) throw CLI::ValidationError(std::string("unknown syntax '") + s + "'");
           flag.value = *style;
         },
         "Syntax style: declarative | dataflow | pseudo-natural")
      ->expected(1);
}

std::unique_ptr<aflow::LmBackend> make_lm(const aflow::CliConfig& config,
                                          const std::string& script_path) {
  if (!script_path.empty()) {
    auto doc = nlohmann::json::parse(read_file_or_throw(script_path));
    return std::make_unique<aflow::ScriptedLm>(doc.get<std::vector<std::string>>());
  }
  aflow::LiveLmConfig live;
  live.base_url = config.lm_url;
  live.model = config.lm_model;
  live.api_key = config.lm_key;
  live.embed_model = config.embed_model;
  if (live.base_url.empty() || live.model.empty()) {
    throw aflow::ConfigError(
        "no language model configured: pass --lm-script or set AFLOW_LM_URL / AFLOW_LM_MODEL");
  }
  return aflow::live_lm_backend(live);
}

int cmd_validate(const aflow::CliConfig& config, const std::string& file,
                 const SyntaxFlag& syntax, const std::string& format) {
  aflow::Registry registry = aflow::load_catalog_file(config.catalog);
  aflow::SyntaxStyle style = style_for_file(file, syntax.value, config);
  aflow::ParseOutcome outcome = aflow::parse(read_file_or_throw(file), style);

  std::vector<aflow::Diagnostic> diags = outcome.diagnostics;
  if (outcome.workflow) {
    auto semantic = aflow::check(*outcome.workflow, registry);
    diags.insert(diags.end(), semantic.begin(), semantic.end());
    aflow::sort_diagnostics(diags);
  }
  bool ok = outcome.workflow.has_value() && aflow::is_executable(diags);
  print_diagnostics(diags, format, ok);
  return ok ? kExitOk : kExitTaskFailure;
}

int cmd_convert(const aflow::CliConfig& config, const std::string& file, const SyntaxFlag& from,
                const SyntaxFlag& to, const std::string& out_path) {
  aflow::SyntaxStyle from_style = style_for_file(file, from.value, config);
  if (!to.value) throw aflow::ConfigError("--to is required");
  aflow::ConvertResult result =
      aflow::convert(read_file_or_throw(file), from_style, *to.value);
  if (!result.text) {
    print_diagnostics(result.diagnostics, config.format, false);
    return kExitTaskFailure;
  }
  if (out_path.empty()) {
    std::cout << *result.text;
  } else {
    write_file_or_throw(out_path, *result.text);
  }
  return kExitOk;
}

int cmd_run(const aflow::CliConfig& config, const std::string& file, const SyntaxFlag& syntax,
            const std::string& backend_name, const std::string& endpoint_flag,
            const std::vector<std::string>& seed_flags) {
  aflow::Registry registry = aflow::load_catalog_file(config.catalog);
  aflow::SyntaxStyle style = style_for_file(file, syntax.value, config);
  aflow::ParseOutcome outcome = aflow::parse(read_file_or_throw(file), style);

  std::vector<aflow::Diagnostic> diags = outcome.diagnostics;
  if (outcome.workflow) {
    auto semantic = aflow::check(*outcome.workflow, registry);
    diags.insert(diags.end(), semantic.begin(), semantic.end());
  }
  if (!outcome.workflow || !aflow::is_executable(diags)) {
    print_diagnostics(diags, "text", false);
    return kExitTaskFailure;
  }
  const aflow::Workflow& w = *outcome.workflow;

  aflow::SeedMap seeds;
  for (const auto& s : seed_flags) {
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw aflow::ConfigError("--seed expects node=value");
    seeds[s.substr(0, eq)] = std::stoull(s.substr(eq + 1));
  }

  if (backend_name == "sim") {
    auto backend = aflow::simulated_backend();
    aflow::ExecutionTrace trace = aflow::execute(w, registry, *backend, seeds);
    std::cout << aflow::trace_to_json(trace);
    return trace.status == aflow::RunStatus::Completed ? kExitOk : kExitRuntime;
  }
  if (backend_name == "comfy") {
    std::string endpoint = endpoint_flag.empty() ? config.comfy_url : endpoint_flag;
    if (endpoint.empty()) {
      throw aflow::ConfigError("no ComfyUI endpoint: pass --endpoint or set AFLOW_COMFY_URL");
    }
    aflow::LiveOptions options;
    options.poll_interval_ms = config.poll_interval_ms;
    options.timeout_ms = config.timeout_ms;
    options.order = w.topological_order();
    aflow::ExecutionTrace trace =
        aflow::submit_live(aflow::export_comfy(w, registry), endpoint, options);
    std::cout << aflow::trace_to_json(trace);
    return trace.status == aflow::RunStatus::Completed ? kExitOk : kExitRuntime;
  }
  throw aflow::ConfigError("unknown backend '" + backend_name + "' (use sim or comfy)");
}

int cmd_infer(const aflow::CliConfig& config, const std::string& task_text,
              const std::string& task_file, const std::vector<std::string>& input_flags,
              const SyntaxFlag& syntax, int limit, const std::string& store_dir,
              const std::string& script_path, bool single_stage, bool no_refine, bool run_sim,
              const std::vector<std::string>& key_functions, const std::string& out_path,
              const std::string& transcript_path) {
  aflow::Registry registry = aflow::load_catalog_file(config.catalog);

  aflow::TaskSpec task;
  task.description = task_file.empty() ? task_text : read_file_or_throw(task_file);
  if (task.description.empty()) throw aflow::ConfigError("--task or --task-file is required");
  task.syntax = syntax.value.value_or(config.syntax.value_or(aflow::SyntaxStyle::declarative));
  task.key_functions = key_functions;
  for (const auto& flag : input_flags) {
    std::size_t c1 = flag.find(':');
    if (c1 == std::string::npos) throw aflow::ConfigError("--input expects name:modality[:uri]");
    std::size_t c2 = flag.find(':', c1 + 1);
    aflow::TaskInput input;
    input.name = flag.substr(0, c1);
    std::string modality =
        c2 == std::string::npos ? flag.substr(c1 + 1) : flag.substr(c1 + 1, c2 - c1 - 1);
    auto m = aflow::modality_from_string(modality);
    if (!m) throw aflow::ConfigError("unknown modality '" + modality + "'");
    input.modality = *m;
    if (c2 != std::string::npos) input.uri = flag.substr(c2 + 1);
    task.inputs.push_back(std::move(input));
  }

  auto lm = make_lm(config, script_path);
  aflow::ReferenceStore store = aflow::load_reference_store(store_dir, *lm, registry);

  aflow::PipelineOptions options;
  options.iteration_limit = limit;
  options.two_stage = !single_stage;
  options.allow_refinement = !no_refine;
  auto sim = aflow::simulated_backend();
  if (run_sim) options.execute_backend = sim.get();

  aflow::InferenceSession session =
      aflow::run_pipeline(task, registry, store, *lm, options);

  if (!transcript_path.empty()) {
    write_file_or_throw(transcript_path, aflow::session_to_json(session));
  }
  if (session.succeeded()) {
    std::string program = aflow::emit(*session.final, task.syntax);
    if (out_path.empty()) {
      std::cout << program;
    } else {
      write_file_or_throw(out_path, program);
    }
    return kExitOk;
  }
  std::cerr << "inference failed after " << session.refinements_used << " refinement(s)\n";
  for (const auto& d : session.candidates.back().diagnostics) {
    if (d.severity == aflow::Severity::Error) {
      std::cerr << aflow::diagnostic_to_text(d) << "\n";
    }
  }
  return kExitTaskFailure;
}

int cmd_bench(const aflow::CliConfig& config, const std::string& suite_dir,
              const std::string& scripts_dir, const std::string& store_dir,
              const SyntaxFlag& syntax_override, int limit, bool single_stage, bool no_refine,
              const std::string& report_path, const std::string& csv_path,
              const std::string& format) {
  aflow::Registry registry = aflow::load_catalog_file(config.catalog);
  std::vector<aflow::TaskCase> cases = aflow::load_suite_dir(suite_dir, registry);

  std::string scripts_at = scripts_dir.empty() ? suite_dir + "/scripts" : scripts_dir;
  auto scripts = aflow::load_suite_scripts(scripts_at);

  aflow::CliConfig lm_config = config;
  aflow::LmFactory factory =
      [&scripts, &lm_config](const aflow::TaskCase& c) -> std::unique_ptr<aflow::LmBackend> {
    auto it = scripts.find(c.id);
    if (it != scripts.end()) return std::make_unique<aflow::ScriptedLm>(it->second);
    return make_lm(lm_config, "");
  };

  aflow::ScriptedLm embedder({});
  aflow::ReferenceStore store = aflow::load_reference_store(store_dir, embedder, registry);

  aflow::RunSuiteOptions options;
  options.pipeline.iteration_limit = limit;
  options.pipeline.two_stage = !single_stage;
  options.pipeline.allow_refinement = !no_refine;
  options.syntax_override = syntax_override.value;

  auto backend = aflow::simulated_backend();
  aflow::SuiteReport report =
      aflow::run_suite(cases, registry, store, factory, *backend, options);

  if (format == "json") {
    std::cout << aflow::report_to_json(report);
  } else {
    std::cout << aflow::report_to_table(report);
  }
  if (!report_path.empty()) write_file_or_throw(report_path, aflow::report_to_json(report));
  if (!csv_path.empty()) write_file_or_throw(csv_path, aflow::report_to_csv(report));
  return kExitOk;
}

int cmd_sync_catalog(const aflow::CliConfig& config, const std::string& endpoint_flag,
                     const std::string& version, const std::string& out_path) {
  std::string endpoint = endpoint_flag.empty() ? config.comfy_url : endpoint_flag;
  if (endpoint.empty()) {
    throw aflow::ConfigError("no ComfyUI endpoint: pass --endpoint or set AFLOW_COMFY_URL");
  }
  aflow::Registry registry = aflow::sync_catalog(endpoint, version);
  std::string doc = aflow::save_catalog(registry);
  if (out_path.empty()) {
    std::cout << doc;
  } else {
    write_file_or_throw(out_path, doc);
  }
  std::cerr << "synced " << registry.size() << " function types\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aflow: a compiler toolkit for symbolic generative workflows"};
  app.require_subcommand(1);

  std::string config_path;
  std::string catalog_flag;
  std::string format_flag;
  app.add_option("--config", config_path, "Path to aflow.toml");
  app.add_option("--catalog", catalog_flag, "Function catalog JSON");
  app.add_option("--format", format_flag, "Output format: text | json");

  // validate
  auto* validate = app.add_subcommand("validate", "Check a program against the catalog")->fallthrough();
  std::string validate_file;
  SyntaxFlag validate_syntax;
  validate->add_option("file", validate_file, "Program file")->required();
  add_syntax_flag(validate, validate_syntax);

  // convert
  auto* convert = app.add_subcommand("convert", "Convert a program between syntaxes")->fallthrough();
  std::string convert_file, convert_out;
  SyntaxFlag convert_from, convert_to;
  convert->add_option("file", convert_file, "Program file")->required();
  add_syntax_flag(convert, convert_from, "--from");
  add_syntax_flag(convert, convert_to, "--to");
  convert->add_option("-o,--out", convert_out, "Write output here instead of stdout");

  // run
  auto* run = app.add_subcommand("run", "Validate and execute a program")->fallthrough();
  std::string run_file, run_backend = "sim", run_endpoint;
  std::vector<std::string> run_seeds;
  SyntaxFlag run_syntax;
  run->add_option("file", run_file, "Program file")->required();
  run->add_option("--backend", run_backend, "sim | comfy")->capture_default_str();
  run->add_option("--endpoint", run_endpoint, "ComfyUI endpoint (comfy backend)");
  run->add_option("--seed", run_seeds, "Per-node seed override, node=value");
  add_syntax_flag(run, run_syntax);

  // infer
  auto* infer = app.add_subcommand("infer", "Synthesize a program from a task description")->fallthrough();
  std::string infer_task, infer_task_file, infer_store = "refs", infer_script;
  std::string infer_out, infer_transcript;
  std::vector<std::string> infer_inputs, infer_keyfns;
  SyntaxFlag infer_syntax;
  int infer_limit = 3;
  bool infer_single = false, infer_norefine = false, infer_execute = false;
  infer->add_option("--task", infer_task, "Task description");
  infer->add_option("--task-file", infer_task_file, "Read the task description from a file");
  infer->add_option("--input", infer_inputs, "Task input, name:modality[:uri] (repeatable)");
  infer->add_option("--key-function", infer_keyfns, "Pin a function type (repeatable)");
  infer->add_option("--store", infer_store, "Reference store directory")->capture_default_str();
  infer->add_option("--lm-script", infer_script, "Scripted responses (JSON array file)");
  infer->add_option("--limit", infer_limit, "Refinement iteration limit")->capture_default_str();
  infer->add_flag("--single-stage", infer_single, "One-shot prompting instead of two stages");
  infer->add_flag("--no-refine", infer_norefine, "Disable the repair loop");
  infer->add_flag("--execute", infer_execute, "Run the result on the simulated backend");
  infer->add_option("-o,--out", infer_out, "Write the final program here");
  infer->add_option("--transcript", infer_transcript, "Write the session transcript JSON here");
  add_syntax_flag(infer, infer_syntax);

  // bench
  auto* bench = app.add_subcommand("bench", "Run a task suite and report metrics")->fallthrough();
  std::string bench_suite, bench_scripts, bench_store = "refs", bench_report, bench_csv;
  SyntaxFlag bench_syntax;
  int bench_limit = 3;
  bool bench_single = false, bench_norefine = false;
  bench->add_option("--suite", bench_suite, "Directory of case JSON files")->required();
  bench->add_option("--scripts", bench_scripts, "Scripted responses directory");
  bench->add_option("--store", bench_store, "Reference store directory")->capture_default_str();
  bench->add_option("--limit", bench_limit, "Refinement iteration limit")->capture_default_str();
  bench->add_flag("--single-stage", bench_single, "One-shot prompting");
  bench->add_flag("--no-refine", bench_norefine, "Disable the repair loop");
  bench->add_option("--report", bench_report, "Write the JSON report here");
  bench->add_option("--csv", bench_csv, "Write per-case rows as CSV here");
  add_syntax_flag(bench, bench_syntax);

  // sync-catalog
  auto* sync = app.add_subcommand("sync-catalog", "Build a catalog from a live ComfyUI server")->fallthrough();
  std::string sync_endpoint, sync_out, sync_version = "synced";
  sync->add_option("--endpoint", sync_endpoint, "ComfyUI endpoint");
  sync->add_option("-o,--out", sync_out, "Write the catalog here instead of stdout");
  sync->add_option("--set-version", sync_version, "Version string for the generated catalog")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    aflow::CliConfig config = aflow::load_cli_config(config_path);
    if (!catalog_flag.empty()) config.catalog = catalog_flag;
    if (!format_flag.empty()) {
      if (format_flag != "text" && format_flag != "json") {
        throw aflow::ConfigError("--format must be text or json");
      }
      config.format = format_flag;
    }

    if (app.got_subcommand(validate)) {
      return cmd_validate(config, validate_file, validate_syntax, config.format);
    }
    if (app.got_subcommand(convert)) {
      return cmd_convert(config, convert_file, convert_from, convert_to, convert_out);
    }
    if (app.got_subcommand(run)) {
      return cmd_run(config, run_file, run_syntax, run_backend, run_endpoint, run_seeds);
    }
    if (app.got_subcommand(infer)) {
      return cmd_infer(config, infer_task, infer_task_file, infer_inputs, infer_syntax,
                       infer_limit, infer_store, infer_script, infer_single, infer_norefine,
                       infer_execute, infer_keyfns, infer_out, infer_transcript);
    }
    if (app.got_subcommand(bench)) {
      return cmd_bench(config, bench_suite, bench_scripts, bench_store, bench_syntax, bench_limit,
                       bench_single, bench_norefine, bench_report, bench_csv, config.format);
    }
    if (app.got_subcommand(sync)) {
      return cmd_sync_catalog(config, sync_endpoint, sync_version, sync_out);
    }
    return kExitUsage;
  } catch (const aflow::LmError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitLm;
  } catch (const aflow::NetworkError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const aflow::TimeoutError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const aflow::PreconditionViolated& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTaskFailure;
  } catch (const aflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
