#include "aflow/registry.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "aflow/errors.hpp"

namespace aflow {

namespace {

const char* kKindNames[] = {"int", "real", "string", "bool", "choice"};

using ordered_json = nlohmann::ordered_json;

std::string value_to_text(const ParamValue& v) {
  switch (v.kind()) {
    case ParamValue::Kind::integer: return std::to_string(v.as_integer());
    case ParamValue::Kind::real: {
      std::ostringstream os;
      os << v.as_real();
      return os.str();
    }
    case ParamValue::Kind::string: return "\"" + v.as_string() + "\"";
    case ParamValue::Kind::boolean: return v.as_boolean() ? "true" : "false";
  }
  return {};
}

bool kind_matches(ParamKind kind, const ParamValue& v) {
  switch (kind) {
    case ParamKind::int_: return v.is_integer();
    // Integers widen to real; the reverse is rejected.
    case ParamKind::real: return v.is_real() || v.is_integer();
    case ParamKind::string: return v.is_string();
    case ParamKind::bool_: return v.is_boolean();
    case ParamKind::choice: return v.is_string();
  }
  return false;
}

ParamValue param_value_from_json(const ordered_json& j, const std::string& context) {
  if (j.is_boolean()) return ParamValue(j.get<bool>());
  if (j.is_number_integer()) return ParamValue(j.get<std::int64_t>());
  if (j.is_number_float()) return ParamValue(j.get<double>());
  if (j.is_string()) return ParamValue(j.get<std::string>());
  throw InvalidSpec(context + ": unsupported literal " + j.dump());
}

ordered_json param_value_to_json(const ParamValue& v) {
  switch (v.kind()) {
    case ParamValue::Kind::integer: return v.as_integer();
    case ParamValue::Kind::real: return v.as_real();
    case ParamValue::Kind::string: return v.as_string();
    case ParamValue::Kind::boolean: return v.as_boolean();
  }
  return nullptr;
}

// Shared by load-time spec checking and resolve_params: empty result means
// the value is admissible for the spec.
std::string check_value(const ParamSpec& spec, const ParamValue& v) {
  if (!kind_matches(spec.kind, v)) {
    return "expected " + std::string(to_string(spec.kind)) + " value";
  }
  if (spec.kind == ParamKind::choice) {
    if (std::find(spec.choices.begin(), spec.choices.end(), v.as_string()) == spec.choices.end()) {
      return "value " + value_to_text(v) + " is not one of the declared choices";
    }
    return {};
  }
  if (spec.range && (spec.kind == ParamKind::int_ || spec.kind == ParamKind::real)) {
    double x = *v.numeric();
    if (x < spec.range->first || x > spec.range->second) {
      std::ostringstream os;
      os << "value " << value_to_text(v) << " out of range [" << spec.range->first << ", "
         << spec.range->second << "]";
      return os.str();
    }
  }
  return {};
}

void check_spec(const std::string& type_name, const ParamSpec& spec) {
  auto fail = [&](const std::string& why) {
    throw InvalidSpec("function '" + type_name + "', param '" + spec.name + "': " + why);
  };
  if (!is_identifier(spec.name)) fail("name is not an identifier");
  if (spec.range) {
    if (spec.kind != ParamKind::int_ && spec.kind != ParamKind::real) {
      fail("range only applies to numeric kinds");
    }
    if (spec.range->first > spec.range->second) fail("range min exceeds max");
  }
  if (spec.kind == ParamKind::choice && spec.choices.empty()) fail("choice kind needs choices");
  if (!spec.choices.empty() && spec.kind != ParamKind::choice) fail("choices need choice kind");
  if (spec.default_value) {
    std::string err = check_value(spec, *spec.default_value);
    if (!err.empty()) fail("default " + err);
  } else if (!spec.required) {
    // Optional parameters must be resolvable without caller input.
    fail("optional parameter needs a default");
  }
}

void check_ports(const std::string& type_name, const std::vector<PortSpec>& ports,
                 const char* side) {
  for (std::size_t i = 0; i < ports.size(); ++i) {
    if (!is_identifier(ports[i].name)) {
      throw InvalidSpec("function '" + type_name + "': " + side + " port name '" + ports[i].name +
                        "' is not an identifier");
    }
    for (std::size_t j = i + 1; j < ports.size(); ++j) {
      if (ports[i].name == ports[j].name) {
        throw InvalidSpec("function '" + type_name + "': duplicate " + side + " port '" +
                          ports[i].name + "'");
      }
    }
  }
}

}  // namespace

std::string_view to_string(ParamKind k) { return kKindNames[static_cast<int>(k)]; }

std::optional<ParamKind> param_kind_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(ParamKind::choice); ++i) {
    if (s == kKindNames[i]) return static_cast<ParamKind>(i);
  }
  return std::nullopt;
}

const PortSpec* FunctionSchema::find_input(std::string_view name) const {
  for (const auto& p : inputs) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const PortSpec* FunctionSchema::find_output(std::string_view name) const {
  for (const auto& p : outputs) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const ParamSpec* FunctionSchema::find_param(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

int FunctionSchema::output_index(std::string_view name) const {
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

Registry::Registry(std::string version, std::vector<FunctionSchema> schemas)
    : version_(std::move(version)) {
  for (auto& s : schemas) {
    if (schemas_.count(s.type_name)) {
      throw DuplicateTypeName("duplicate function type '" + s.type_name + "'");
    }
    if (!is_identifier(s.type_name)) {
      throw InvalidSpec("function type '" + s.type_name + "' is not an identifier");
    }
    if (s.outputs.empty()) {
      throw InvalidSpec("function '" + s.type_name + "' declares no outputs");
    }
    check_ports(s.type_name, s.inputs, "input");
    check_ports(s.type_name, s.outputs, "output");
    for (const auto& p : s.params) check_spec(s.type_name, p);
    order_.push_back(s.type_name);
    schemas_.emplace(s.type_name, std::move(s));
  }
}

const FunctionSchema* Registry::find(std::string_view type_name) const {
  auto it = schemas_.find(type_name);
  return it == schemas_.end() ? nullptr : &it->second;
}

const FunctionSchema& Registry::lookup(std::string_view type_name) const {
  const FunctionSchema* s = find(type_name);
  if (!s) throw UnknownFunctionError("unknown function type '" + std::string(type_name) + "'");
  return *s;
}

Registry load_catalog(const std::string& document) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw CatalogSyntaxError(std::string("catalog: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("functions")) {
    throw CatalogSyntaxError("catalog: expected object with a 'functions' array");
  }

  std::vector<FunctionSchema> schemas;
  for (const auto& jf : doc.at("functions")) {
    FunctionSchema s;
    try {
      s.type_name = jf.at("type").get<std::string>();
      s.doc = jf.value("doc", std::string{});
      s.sink = jf.value("sink", false);
      for (const auto& jp : jf.value("inputs", ordered_json::array())) {
        PortSpec p;
        p.name = jp.at("name").get<std::string>();
        auto m = modality_from_string(jp.at("modality").get<std::string>());
        if (!m) throw InvalidSpec("unknown modality '" + jp.at("modality").get<std::string>() +
                                  "' on input '" + p.name + "' of '" + s.type_name + "'");
        p.modality = *m;
        p.required = jp.value("required", true);
        s.inputs.push_back(std::move(p));
      }
      for (const auto& jp : jf.value("outputs", ordered_json::array())) {
        PortSpec p;
        p.name = jp.at("name").get<std::string>();
        auto m = modality_from_string(jp.at("modality").get<std::string>());
        if (!m) throw InvalidSpec("unknown modality '" + jp.at("modality").get<std::string>() +
                                  "' on output '" + p.name + "' of '" + s.type_name + "'");
        p.modality = *m;
        s.outputs.push_back(std::move(p));
      }
      for (const auto& jp : jf.value("params", ordered_json::array())) {
        ParamSpec p;
        p.name = jp.at("name").get<std::string>();
        auto k = param_kind_from_string(jp.at("kind").get<std::string>());
        if (!k) throw InvalidSpec("unknown param kind '" + jp.at("kind").get<std::string>() +
                                  "' on '" + s.type_name + "." + p.name + "'");
        p.kind = *k;
        if (jp.contains("default")) {
          p.default_value = param_value_from_json(jp.at("default"), s.type_name + "." + p.name);
        }
        if (jp.contains("range")) {
          const auto& r = jp.at("range");
          if (!r.is_array() || r.size() != 2 || !r.at(0).is_number() || !r.at(1).is_number()) {
            throw InvalidSpec("range of '" + s.type_name + "." + p.name +
                              "' must be a numeric pair");
          }
          p.range = {r.at(0).get<double>(), r.at(1).get<double>()};
        }
        if (jp.contains("choices")) {
          for (const auto& c : jp.at("choices")) p.choices.push_back(c.get<std::string>());
        }
        p.required = jp.value("required", false);
        s.params.push_back(std::move(p));
      }
    } catch (const nlohmann::json::exception& e) {
      throw CatalogSyntaxError("catalog entry " + jf.dump() + ": " + e.what());
    }
    schemas.push_back(std::move(s));
  }
  return Registry(doc.value("version", std::string{}), std::move(schemas));
}

Registry load_catalog_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CatalogSyntaxError("cannot open catalog file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_catalog(buf.str());
}

std::string save_catalog(const Registry& r, int indent) {
  ordered_json doc;
  doc["version"] = r.version();
  doc["functions"] = ordered_json::array();
  for (const auto& name : r.type_names()) {
    const FunctionSchema& s = *r.find(name);
    ordered_json jf;
    jf["type"] = s.type_name;
    jf["doc"] = s.doc;
    if (s.sink) jf["sink"] = true;
    jf["inputs"] = ordered_json::array();
    for (const auto& p : s.inputs) {
      jf["inputs"].push_back({{"name", p.name},
                              {"modality", std::string(to_string(p.modality))},
                              {"required", p.required}});
    }
    jf["outputs"] = ordered_json::array();
    for (const auto& p : s.outputs) {
      jf["outputs"].push_back(
          {{"name", p.name}, {"modality", std::string(to_string(p.modality))}});
    }
    jf["params"] = ordered_json::array();
    for (const auto& p : s.params) {
      ordered_json jp;
      jp["name"] = p.name;
      jp["kind"] = std::string(to_string(p.kind));
      if (p.default_value) jp["default"] = param_value_to_json(*p.default_value);
      if (p.range) jp["range"] = {p.range->first, p.range->second};
      if (!p.choices.empty()) jp["choices"] = p.choices;
      jp["required"] = p.required;
      jf["params"].push_back(std::move(jp));
    }
    doc["functions"].push_back(std::move(jf));
  }
  return doc.dump(indent) + "\n";
}

Workflow resolve_workflow_params(const Workflow& w, const Registry& r) {
  Workflow out = w;
  for (const auto& n : w.nodes()) {
    const FunctionSchema* schema = r.find(n.type_name);
    if (!schema) continue;
    ResolvedParams res = resolve_params(*schema, n.params);
    if (res.ok()) out.find_node(n.id)->params = std::move(res.values);
  }
  return out;
}

ResolvedParams resolve_params(const FunctionSchema& schema, const ParamMap& given) {
  ResolvedParams out;
  auto complain = [&](const std::string& msg) {
    out.diagnostics.push_back(Diagnostic{ErrorCategory::InvalidParameter, Severity::Error,
                                         Location::none(), msg});
  };

  for (const auto& [name, value] : given) {
    if (!schema.find_param(name)) {
      complain("unknown parameter '" + name + "' for '" + schema.type_name + "'");
    }
  }
  for (const auto& spec : schema.params) {
    const ParamValue* v = find_param(given, spec.name);
    if (v) {
      std::string err = check_value(spec, *v);
      if (!err.empty()) {
        complain("parameter '" + spec.name + "' of '" + schema.type_name + "': " + err);
        continue;
      }
      // Integer literals for real parameters keep their meaning but take the
      // declared kind.
      if (spec.kind == ParamKind::real && v->is_integer()) {
        out.values.emplace_back(spec.name, ParamValue(static_cast<double>(v->as_integer())));
      } else {
        out.values.emplace_back(spec.name, *v);
      }
    } else if (spec.default_value) {
      out.values.emplace_back(spec.name, *spec.default_value);
    } else {
      complain("missing required parameter '" + spec.name + "' of '" + schema.type_name + "'");
    }
  }
  return out;
}

}  // namespace aflow
