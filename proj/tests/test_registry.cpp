#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "aflow/registry.hpp"

#include "aflow/errors.hpp"
#include "support/util.hpp"

using namespace aflow;

namespace {

const char* kMinimalCatalog = R"({
  "version": "mini",
  "functions": [
    {
      "type": "Blur",
      "doc": "",
      "inputs": [{"name": "image", "modality": "image", "required": true}],
      "outputs": [{"name": "IMAGE", "modality": "image"}],
      "params": [{"name": "strength", "kind": "real", "range": [0, 1], "default": 0.5, "required": false}]
    }
  ]
})";

}  // namespace

TEST_CASE("minimal catalog loads") {
  Registry r = load_catalog(kMinimalCatalog);
  CHECK(r.size() == 1);
  CHECK(r.version() == "mini");
  CHECK(r.find("Blur") != nullptr);
}

TEST_CASE("default outside range is rejected") {
  std::string bad = kMinimalCatalog;
  bad.replace(bad.find("\"default\": 0.5"), 14, "\"default\": 1.5");
  CHECK_THROWS_AS(load_catalog(bad), InvalidSpec);
}

TEST_CASE("bundled 16-schema test catalog") {
  Registry r = load_catalog_file(testutil::repo_path("tests/data/catalog16.json"));
  CHECK(r.size() == 16);
  CHECK(r.version() == "test-1");
}

TEST_CASE("shipping catalog loads and spot-checks") {
  const Registry& r = testutil::main_registry();
  CHECK(r.size() == 26);
  CHECK(r.version() == "test-1");

  const FunctionSchema& load = r.lookup("LoadImage");
  REQUIRE(load.outputs.size() == 2);
  CHECK(load.outputs[0].name == "IMAGE");
  CHECK(load.outputs[0].modality == Modality::image);
  CHECK(load.output_index("MASK") == 1);
  CHECK(load.find_param("path")->required);

  const FunctionSchema& save = r.lookup("SaveImage");
  CHECK(save.sink);
  CHECK(save.find_input("images")->required);
}

TEST_CASE("lookup failures are loud and case-sensitive") {
  const Registry& r = testutil::main_registry();
  CHECK(r.find("NoSuchNode") == nullptr);
  CHECK_THROWS_AS(r.lookup("NoSuchNode"), UnknownFunctionError);
  CHECK(r.find("loadimage") == nullptr);
  CHECK_THROWS_AS(r.lookup("loadimage"), UnknownFunctionError);
}

TEST_CASE("catalog error paths") {
  CHECK_THROWS_AS(load_catalog("{nope"), CatalogSyntaxError);
  CHECK_THROWS_AS(load_catalog("[]"), CatalogSyntaxError);

  // Duplicate type name.
  std::string dup = R"({"version":"v","functions":[
    {"type":"A","outputs":[{"name":"o","modality":"any"}],"inputs":[],"params":[]},
    {"type":"A","outputs":[{"name":"o","modality":"any"}],"inputs":[],"params":[]}]})";
  CHECK_THROWS_AS(load_catalog(dup), DuplicateTypeName);

  // No outputs.
  std::string no_out = R"({"version":"v","functions":[
    {"type":"A","outputs":[],"inputs":[],"params":[]}]})";
  CHECK_THROWS_AS(load_catalog(no_out), InvalidSpec);

  // Optional parameter without a default cannot be resolved.
  std::string opt = R"({"version":"v","functions":[
    {"type":"A","outputs":[{"name":"o","modality":"any"}],"inputs":[],
     "params":[{"name":"p","kind":"int","required":false}]}]})";
  CHECK_THROWS_AS(load_catalog(opt), InvalidSpec);

  // Range on a non-numeric kind.
  std::string srange = R"({"version":"v","functions":[
    {"type":"A","outputs":[{"name":"o","modality":"any"}],"inputs":[],
     "params":[{"name":"p","kind":"string","range":[0,1],"required":true}]}]})";
  CHECK_THROWS_AS(load_catalog(srange), InvalidSpec);

  // min > max.
  std::string flipped = R"({"version":"v","functions":[
    {"type":"A","outputs":[{"name":"o","modality":"any"}],"inputs":[],
     "params":[{"name":"p","kind":"int","range":[2,1],"required":true}]}]})";
  CHECK_THROWS_AS(load_catalog(flipped), InvalidSpec);

  // Duplicate port names within a side.
  std::string dup_port = R"({"version":"v","functions":[
    {"type":"A","outputs":[{"name":"o","modality":"any"}],
     "inputs":[{"name":"i","modality":"any"},{"name":"i","modality":"image"}],"params":[]}]})";
  CHECK_THROWS_AS(load_catalog(dup_port), InvalidSpec);

  // Unknown modality.
  std::string bad_mod = R"({"version":"v","functions":[
    {"type":"A","outputs":[{"name":"o","modality":"hologram"}],"inputs":[],"params":[]}]})";
  CHECK_THROWS_AS(load_catalog(bad_mod), InvalidSpec);
}

TEST_CASE("catalog save/load round trip") {
  const Registry& r = testutil::main_registry();
  std::string first = save_catalog(r);
  Registry again = load_catalog(first);
  CHECK(save_catalog(again) == first);
  CHECK(again.size() == r.size());
  CHECK(again.type_names() == r.type_names());
}

TEST_CASE("resolve_params fills defaults") {
  Registry r = load_catalog(kMinimalCatalog);
  const FunctionSchema& blur = r.lookup("Blur");

  ResolvedParams res = resolve_params(blur, {});
  REQUIRE(res.ok());
  REQUIRE(res.values.size() == 1);
  CHECK(res.values[0].first == "strength");
  CHECK(res.values[0].second == ParamValue(0.5));
}

TEST_CASE("resolve_params flags bad inputs") {
  Registry r = load_catalog(kMinimalCatalog);
  const FunctionSchema& blur = r.lookup("Blur");

  ResolvedParams out_of_range = resolve_params(blur, {{"strength", ParamValue(1.7)}});
  REQUIRE(out_of_range.diagnostics.size() == 1);
  CHECK(out_of_range.diagnostics[0].category == ErrorCategory::InvalidParameter);
  CHECK(out_of_range.diagnostics[0].message.find("out of range") != std::string::npos);

  ResolvedParams misspelled = resolve_params(blur, {{"strenght", ParamValue(0.3)}});
  REQUIRE(misspelled.diagnostics.size() == 1);
  CHECK(misspelled.diagnostics[0].message.find("unknown parameter") != std::string::npos);

  ResolvedParams wrong_kind = resolve_params(blur, {{"strength", ParamValue("soft")}});
  CHECK(wrong_kind.diagnostics.size() == 1);
}

TEST_CASE("resolve_params reports missing required values") {
  const Registry& r = testutil::main_registry();
  ResolvedParams res = resolve_params(r.lookup("LoadImage"), {});
  REQUIRE(res.diagnostics.size() == 1);
  CHECK(res.diagnostics[0].category == ErrorCategory::InvalidParameter);
  CHECK(res.diagnostics[0].message.find("missing required") != std::string::npos);
}

TEST_CASE("resolve_params coerces integer literals for real parameters") {
  const Registry& r = testutil::main_registry();
  ResolvedParams res = resolve_params(r.lookup("KSampler"),
                                      {{"cfg", ParamValue(std::int64_t{8})}});
  REQUIRE(res.ok());
  const ParamValue* cfg = find_param(res.values, "cfg");
  REQUIRE(cfg != nullptr);
  CHECK(cfg->is_real());
  CHECK(cfg->as_real() == 8.0);
  // The reverse direction stays strict.
  ResolvedParams narrowed = resolve_params(r.lookup("KSampler"), {{"steps", ParamValue(2.5)}});
  CHECK(!narrowed.ok());
}

TEST_CASE("diagnostic-free resolution binds exactly the declared names") {
  const Registry& r = testutil::main_registry();
  for (const auto& name : r.type_names()) {
    const FunctionSchema& schema = r.lookup(name);
    ParamMap given;
    // Provide required params with plausible values, leave the rest default.
    for (const auto& p : schema.params) {
      if (!p.required) continue;
      switch (p.kind) {
        case ParamKind::int_: given.emplace_back(p.name, ParamValue(std::int64_t{1})); break;
        case ParamKind::real: given.emplace_back(p.name, ParamValue(1.0)); break;
        case ParamKind::string: given.emplace_back(p.name, ParamValue("x")); break;
        case ParamKind::bool_: given.emplace_back(p.name, ParamValue(true)); break;
        case ParamKind::choice: given.emplace_back(p.name, ParamValue(p.choices.front())); break;
      }
    }
    ResolvedParams res = resolve_params(schema, given);
    REQUIRE(res.ok());
    REQUIRE(res.values.size() == schema.params.size());
    for (std::size_t i = 0; i < schema.params.size(); ++i) {
      CHECK(res.values[i].first == schema.params[i].name);
    }
  }
}

TEST_CASE("choice values are checked against the list") {
  const Registry& r = testutil::main_registry();
  ResolvedParams ok = resolve_params(r.lookup("KSampler"),
                                     {{"sampler_name", ParamValue("ddim")}});
  CHECK(ok.ok());
  ResolvedParams bad = resolve_params(r.lookup("KSampler"),
                                      {{"sampler_name", ParamValue("warp")}});
  REQUIRE(bad.diagnostics.size() == 1);
  CHECK(bad.diagnostics[0].message.find("not one of") != std::string::npos);
}
