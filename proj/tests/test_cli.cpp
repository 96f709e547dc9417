#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "aflow/syntax.hpp"
#include "support/fixtures.hpp"
#include "support/util.hpp"

namespace {

namespace fs = std::filesystem;

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the installed binary from the repository root so the bundled data
// paths (catalog/, refs/, suite/) resolve as documented. `env_prefix` can
// inject or clear environment variables for the child.
CmdResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  std::string err_file = (fs::temp_directory_path() /
                          ("aflow_cli_err_" + std::to_string(++counter) + ".txt"))
                             .string();
  std::string cmd = "cd " + std::string(REPO_ROOT) + " && " + env_prefix + " " +
                    std::string(AFLOW_BIN) + " " + args + " 2>" + err_file;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult result;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) result.out.append(buf, n);
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.err = testutil::read_file(err_file);
  fs::remove(err_file);
  return result;
}

std::string temp_file(const std::string& name, const std::string& content) {
  fs::path path = fs::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path.string();
}

}  // namespace

TEST_CASE("validate: clean fixture exits 0") {
  CmdResult r = run_cli("validate tests/data/fixtures/blend_pipeline.adl");
  CHECK(r.exit_code == 0);
  CHECK(r.err.empty());
}

TEST_CASE("validate: a gap exits 1 with the right category") {
  aflow::Workflow w = testutil::blend_pipeline();
  w.disconnect("samp", "latent_image");
  std::string file = temp_file("gap.adl", aflow::emit(w, aflow::SyntaxStyle::declarative));
  CmdResult r = run_cli("validate " + file);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("TopologicalGap") != std::string::npos);
  CHECK(r.err.find("samp.latent_image") != std::string::npos);
}

TEST_CASE("validate: missing catalog is a config error") {
  CmdResult r = run_cli("validate tests/data/fixtures/blend_pipeline.adl --catalog nope.json");
  CHECK(r.exit_code == 2);
}

TEST_CASE("validate: json format is machine readable") {
  CmdResult r = run_cli("validate tests/data/fixtures/blend_pipeline.adl --format json");
  CHECK(r.exit_code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("executable") == true);
  CHECK(doc.at("diagnostics").empty());
}

TEST_CASE("convert: golden conversion and identity normalization") {
  CmdResult r = run_cli("convert tests/data/fixtures/blend_pipeline.adl --to dataflow");
  CHECK(r.exit_code == 0);
  std::string expected =
      aflow::convert(testutil::read_file(testutil::repo_path("tests/data/fixtures/blend_pipeline.adl")),
                     aflow::SyntaxStyle::declarative, aflow::SyntaxStyle::dataflow)
          .text.value();
  CHECK(r.out == expected);

  std::string scruffy = temp_file("scruffy.adl", "workflow {  node b = Reroute( ) ;\n }");
  CmdResult norm = run_cli("convert " + scruffy + " --to declarative");
  CHECK(norm.exit_code == 0);
  CHECK(norm.out == "workflow {\n  node b = Reroute();\n}\n");
}

TEST_CASE("convert: parse failures exit 1 with diagnostics") {
  std::string bad = temp_file("bad.adl", "workflow { node = }");
  CmdResult r = run_cli("convert " + bad + " --to dataflow");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("InvalidFormat") != std::string::npos);
}

TEST_CASE("run: simulated execution emits a completed trace") {
  CmdResult r = run_cli("run tests/data/fixtures/image_merge.adl --backend sim");
  CHECK(r.exit_code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("status") == "completed");
  CHECK(doc.at("order").size() == 13);
  CHECK(doc.at("failure").is_null());
}

TEST_CASE("run: seeds change the trace") {
  CmdResult a = run_cli("run tests/data/fixtures/blend_pipeline.adl --backend sim");
  CmdResult b = run_cli("run tests/data/fixtures/blend_pipeline.adl --backend sim --seed samp=9");
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(a.out != b.out);
}

TEST_CASE("run: invalid workflow exits 1, unreachable backend exits 3") {
  aflow::Workflow w = testutil::blend_pipeline();
  w.find_node("im1")->type_name = "LoadImg";
  std::string file = temp_file("badrun.adl", aflow::emit(w, aflow::SyntaxStyle::declarative));
  CmdResult invalid = run_cli("run " + file + " --backend sim");
  CHECK(invalid.exit_code == 1);

  CmdResult comfy = run_cli(
      "run tests/data/fixtures/blend_pipeline.adl --backend comfy --endpoint http://127.0.0.1:9");
  CHECK(comfy.exit_code == 3);
  CHECK(comfy.err.find("error") != std::string::npos);
}

TEST_CASE("infer: scripted happy path is hermetic") {
  aflow::ParseOutcome upscale =
      aflow::parse(testutil::read_file(testutil::repo_path("refs/upscale.adl")),
                   aflow::SyntaxStyle::declarative);
  REQUIRE(upscale.ok());
  aflow::Workflow nodes;
  for (const auto& n : upscale.workflow->nodes()) nodes.add_node(n.id, n.type_name, n.params);

  nlohmann::json script = {
      "```\n" + aflow::emit(nodes, aflow::SyntaxStyle::declarative) + "```",
      "```\n" + aflow::emit(*upscale.workflow, aflow::SyntaxStyle::declarative) + "```"};
  std::string script_file = temp_file("script.json", script.dump());
  std::string transcript = (fs::temp_directory_path() / "transcript.json").string();

  CmdResult r = run_cli("infer --task \"enlarge the photo\" --input photo:image:inputs/small.png"
                        " --lm-script " + script_file +
                        " --execute --transcript " + transcript + " --store refs");

  // A poisoned live endpoint proves scripted mode makes no network calls.
  CmdResult hermetic = run_cli(
      "infer --task \"enlarge the photo\" --lm-script " + script_file + " --store refs",
      "env AFLOW_LM_URL=http://127.0.0.1:9 AFLOW_LM_MODEL=x");
  CHECK(hermetic.exit_code == 0);
  CHECK(hermetic.out.find("UpscaleImage") != std::string::npos);

  CHECK(r.exit_code == 0);
  CHECK(r.out.find("node up = UpscaleImage") != std::string::npos);
  auto doc = nlohmann::json::parse(testutil::read_file(transcript));
  CHECK(doc.at("succeeded") == true);
  CHECK(doc.at("calls").size() == 2);
}

TEST_CASE("infer: a never-repairing script exits 1 after the limit") {
  nlohmann::json script = {"not a program", "not a program", "not a program", "not a program"};
  std::string script_file = temp_file("noscript.json", script.dump());
  CmdResult r = run_cli("infer --task \"do something\" --lm-script " + script_file +
                        " --store refs --limit 3");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("failed") != std::string::npos);
}

TEST_CASE("infer: usage errors exit 2, missing model config exits 2") {
  CmdResult no_task = run_cli("infer --lm-script /nonexistent.json");
  CHECK(no_task.exit_code == 2);
  CmdResult no_lm = run_cli("infer --task \"x\" --store refs",
                            "env -u AFLOW_LM_URL -u AFLOW_LM_MODEL");
  CHECK(no_lm.exit_code == 2);
}

TEST_CASE("bench: the bundled suite reproduces its golden aggregates") {
  std::string report_file = (fs::temp_directory_path() / "report.json").string();
  CmdResult r = run_cli("bench --suite suite --store refs --report " + report_file +
                        " --format json");
  CHECK(r.exit_code == 0);
  auto doc = nlohmann::json::parse(testutil::read_file(report_file));
  CHECK(doc.at("cases").size() == 24);
  CHECK(doc.at("aggregates").at("pass1_compile").get<double>() == doctest::Approx(22.0 / 24.0));
  CHECK(doc.at("aggregates").at("pass1_execute").get<double>() == doctest::Approx(22.0 / 24.0));
  CHECK(doc.at("aggregates").at("resolve_rate").get<double>() == doctest::Approx(22.0 / 24.0));
  // Every golden-equivalence case resolved.
  for (const auto& row : doc.at("cases")) {
    if (row.at("id").get<std::string>().ends_with("-1")) {
      CHECK(row.at("resolved") == true);
    }
  }
}

TEST_CASE("bench: an empty directory is an empty report") {
  fs::path dir = fs::temp_directory_path() / "aflow_empty_suite";
  fs::create_directories(dir);
  CmdResult r = run_cli("bench --suite " + dir.string() + " --store refs");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("cases: 0") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("bench: malformed case files are reported but do not abort") {
  fs::path dir = fs::temp_directory_path() / "aflow_bad_suite";
  fs::create_directories(dir);
  std::ofstream(dir / "broken.json") << "{ nope";
  CmdResult r = run_cli("bench --suite " + dir.string() + " --store refs");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("!") != std::string::npos);  // errored marker in the table
  fs::remove_all(dir);
}

TEST_CASE("sync-catalog: maps a live object_info endpoint") {
  httplib::Server server;
  server.Get("/object_info", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(testutil::read_file(testutil::repo_path("tests/data/comfy/object_info.json")),
                    "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread runner([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  CmdResult r = run_cli("sync-catalog --endpoint http://127.0.0.1:" + std::to_string(port) +
                        " --set-version synced-cli");
  server.stop();
  runner.join();
  CHECK(r.exit_code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("version") == "synced-cli");
  CHECK(doc.at("functions").size() == 3);

  CmdResult dead = run_cli("sync-catalog --endpoint http://127.0.0.1:9");
  CHECK(dead.exit_code == 3);
}

TEST_CASE("config file feeds defaults and flags override it") {
  std::string config = temp_file("aflow_test.toml",
                                 "# test config\n"
                                 "catalog = \"does/not/exist.json\"\n"
                                 "format = \"json\"\n"
                                 "iteration_limit = 2\n");
  CmdResult broken = run_cli("--config " + config +
                             " validate tests/data/fixtures/blend_pipeline.adl");
  CHECK(broken.exit_code == 2);  // config points at a missing catalog

  CmdResult fixed = run_cli("--config " + config + " --catalog catalog/test.json" +
                            " validate tests/data/fixtures/blend_pipeline.adl");
  CHECK(fixed.exit_code == 0);
  // format=json came from the config file.
  auto doc = nlohmann::json::parse(fixed.out);
  CHECK(doc.at("executable") == true);

  CmdResult bad_config = run_cli("--config /nonexistent.toml validate x.adl");
  CHECK(bad_config.exit_code == 2);
}

TEST_CASE("unknown syntax flags are usage errors") {
  CmdResult r = run_cli("validate tests/data/fixtures/blend_pipeline.adl --syntax prose");
  CHECK(r.exit_code != 0);
  CHECK(r.exit_code != 1);
}
