#include "aflow/comfy.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "aflow/validator.hpp"

namespace aflow {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json literal_to_json(const ParamValue& v) {
  switch (v.kind()) {
    case ParamValue::Kind::integer: return v.as_integer();
    case ParamValue::Kind::real: return v.as_real();
    case ParamValue::Kind::string: return v.as_string();
    case ParamValue::Kind::boolean: return v.as_boolean();
  }
  return nullptr;
}

std::string sanitize_node_id(const std::string& key) {
  if (is_identifier(key)) return key;
  std::string out = "n";
  for (char c : key) {
    bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
              c == '_';
    out += ok ? c : '_';
  }
  return out;
}

bool looks_like_link(const ordered_json& v) {
  return v.is_array() && v.size() == 2 && v.at(0).is_string() && v.at(1).is_number_integer();
}

Modality modality_from_comfy_type(const std::string& t) {
  if (t == "IMAGE") return Modality::image;
  if (t == "LATENT") return Modality::latent;
  if (t == "CONDITIONING") return Modality::conditioning;
  if (t == "MODEL" || t == "CLIP" || t == "VAE" || t == "CONTROL_NET" || t == "CLIP_VISION") {
    return Modality::model;
  }
  if (t == "MASK") return Modality::mask;
  if (t == "AUDIO") return Modality::audio;
  if (t == "VIDEO" || t == "WEBCAM") return Modality::video;
  if (t == "MESH") return Modality::mesh;
  if (t == "STRING") return Modality::text;
  if (t == "INT" || t == "FLOAT" || t == "NUMBER" || t == "BOOLEAN") return Modality::number;
  return Modality::any;
}

Modality modality_from_asset_kind(const std::string& kind) {
  if (kind == "images") return Modality::image;
  if (kind == "audio") return Modality::audio;
  if (kind == "gifs" || kind == "videos") return Modality::video;
  if (kind == "mesh" || kind == "meshes") return Modality::mesh;
  if (kind == "text") return Modality::text;
  return Modality::any;
}

}  // namespace

std::string export_comfy(const Workflow& w, const Registry& r, int indent) {
  auto diags = check(w, r);
  if (!is_executable(diags)) {
    std::string first;
    for (const auto& d : diags) {
      if (d.severity == Severity::Error) {
        first = diagnostic_to_text(d);
        break;
      }
    }
    throw PreconditionViolated("workflow is not executable: " + first);
  }

  Workflow c = canonicalize(w);
  ordered_json doc = ordered_json::object();
  for (const auto& n : c.nodes()) {
    if (!is_identifier(n.id)) {
      throw ExportUnsupported("node id '" + n.id + "' is not a usable prompt key");
    }
    const FunctionSchema& schema = r.lookup(n.type_name);

    // Literal parameters (fully resolved) and link entries share one map,
    // ordered by key for byte-stable output.
    std::map<std::string, ordered_json> inputs;
    for (const auto& [k, v] : resolve_params(schema, n.params).values) {
      inputs[k] = literal_to_json(v);
    }
    for (const auto& e : c.incoming_flows(n.id)) {
      const FunctionSchema& src_schema = r.lookup(c.find_node(e.src.node_id)->type_name);
      int index = src_schema.output_index(e.src.port_name);
      inputs[e.dst.port_name] = ordered_json::array({e.src.node_id, index});
    }

    ordered_json entry;
    entry["class_type"] = n.type_name;
    entry["inputs"] = ordered_json::object();
    for (const auto& [k, v] : inputs) entry["inputs"][k] = v;
    doc[n.id] = std::move(entry);
  }
  return doc.dump(indent) + "\n";
}

ImportResult import_comfy(const std::string& doc_text, const Registry& r) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(doc_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ImportError(std::string("prompt json: ") + e.what());
  }
  if (doc.is_object() && doc.contains("prompt") && doc.at("prompt").is_object()) {
    doc = doc.at("prompt");
  }
  if (!doc.is_object()) throw ImportError("prompt json: expected an object of nodes");

  ImportResult result;
  Workflow& w = result.workflow;

  std::map<std::string, std::string> renamed;  // original key -> node id
  for (const auto& [key, entry] : doc.items()) {
    if (!entry.is_object() || !entry.contains("class_type")) {
      throw ImportError("node '" + key + "': missing class_type");
    }
    std::string id = sanitize_node_id(key);
    if (w.has_node(id)) {
      throw ImportError("node key '" + key + "' collides with '" + id + "' after renaming");
    }
    renamed[key] = id;
    w.add_node(id, entry.at("class_type").get<std::string>(), {});
  }

  for (const auto& [key, entry] : doc.items()) {
    const std::string& id = renamed.at(key);
    NodeInstance* node = w.find_node(id);
    const FunctionSchema* schema = r.find(node->type_name);

    const ordered_json inputs_obj = entry.value("inputs", ordered_json::object());
    for (const auto& [name, value] : inputs_obj.items()) {
      if (looks_like_link(value)) {
        const std::string src_key = value.at(0).get<std::string>();
        auto src_it = renamed.find(src_key);
        if (src_it == renamed.end()) {
          throw ImportError("node '" + key + "' input '" + name + "' links to unknown node '" +
                            src_key + "'");
        }
        const NodeInstance* src = w.find_node(src_it->second);
        const FunctionSchema* src_schema = r.find(src->type_name);
        if (!src_schema) {
          throw ImportError("cannot resolve output index " + value.at(1).dump() + " of '" +
                            src->type_name + "' (unknown function type)");
        }
        int index = value.at(1).get<int>();
        if (index < 0 || index >= static_cast<int>(src_schema->outputs.size())) {
          throw ImportError("output index " + std::to_string(index) + " out of range for '" +
                            src->type_name + "'");
        }
        w.connect(src_it->second, src_schema->outputs[index].name, id, name);
        continue;
      }

      bool known_param = schema && schema->find_param(name) != nullptr;
      if (!schema || known_param) {
        // Unknown class_type: keep every literal as a parameter and let the
        // validator flag the type itself.
        if (value.is_boolean()) node->params.emplace_back(name, ParamValue(value.get<bool>()));
        else if (value.is_number_integer())
          node->params.emplace_back(name, ParamValue(value.get<std::int64_t>()));
        else if (value.is_number_float())
          node->params.emplace_back(name, ParamValue(value.get<double>()));
        else if (value.is_string())
          node->params.emplace_back(name, ParamValue(value.get<std::string>()));
        else
          throw ImportError("node '" + key + "' input '" + name + "': unsupported literal " +
                            value.dump());
      } else {
        result.diagnostics.push_back(Diagnostic{
            ErrorCategory::InvalidParameter, Severity::Warning, Location::at_node(id),
            "field '" + name + "' is neither a parameter nor an input of '" + node->type_name +
                "'; preserved in metadata"});
        w.metadata()["comfy.extra." + id + "." + name] = value.dump();
      }
    }
  }
  return result;
}

ExecutionTrace submit_live(const std::string& prompt_json, const std::string& endpoint,
                           const LiveOptions& options) {
  ordered_json prompt;
  try {
    prompt = ordered_json::parse(prompt_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw ImportError(std::string("prompt json: ") + e.what());
  }

  httplib::Client client(endpoint);
  client.set_connection_timeout(10, 0);

  ordered_json body;
  body["prompt"] = prompt;
  body["client_id"] = options.client_id;
  auto posted = client.Post("/prompt", body.dump(), "application/json");
  if (!posted) {
    throw NetworkError("cannot reach '" + endpoint + "': " + httplib::to_string(posted.error()));
  }
  if (posted->status != 200) {
    throw NetworkError("POST /prompt returned status " + std::to_string(posted->status) + ": " +
                       posted->body);
  }
  std::string prompt_id;
  try {
    prompt_id = ordered_json::parse(posted->body).at("prompt_id").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw NetworkError(std::string("malformed /prompt response: ") + e.what());
  }

  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::milliseconds(options.timeout_ms);
  while (true) {
    auto got = client.Get("/history/" + prompt_id);
    if (!got) {
      throw NetworkError("history poll failed: " + httplib::to_string(got.error()));
    }
    if (got->status == 200) {
      ordered_json history;
      try {
        history = ordered_json::parse(got->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw NetworkError(std::string("malformed history response: ") + e.what());
      }
      if (history.contains(prompt_id)) {
        const auto& entry = history.at(prompt_id);
        ExecutionTrace trace;
        trace.order = options.order;

        const auto status = entry.value("status", ordered_json::object());
        const std::string status_str = status.value("status_str", "");
        bool errored = status_str == "error";
        if (errored) {
          trace.status = RunStatus::Failed;
          trace.failure = NodeFailureInfo{"", "remote execution error"};
          const ordered_json messages = status.value("messages", ordered_json::array());
          for (const auto& message : messages) {
            if (message.is_array() && message.size() == 2 &&
                message.at(0) == "execution_error") {
              const auto& detail = message.at(1);
              trace.failure = NodeFailureInfo{
                  detail.value("node_id", std::string{}),
                  detail.value("exception_message", std::string{"remote execution error"})};
            }
          }
        }

        const ordered_json outputs_obj = entry.value("outputs", ordered_json::object());
        for (const auto& [node_id, assets] : outputs_obj.items()) {
          if (!assets.is_object()) continue;
          for (const auto& [kind, files] : assets.items()) {
            if (!files.is_array()) continue;
            int i = 0;
            for (const auto& file : files) {
              std::string token = file.is_object() ? file.value("filename", file.dump())
                                                   : file.dump();
              std::string port = kind + (i ? "_" + std::to_string(i) : "");
              trace.outputs[{node_id, port}] =
                  Artifact{modality_from_asset_kind(kind), token};
              ++i;
            }
          }
        }
        if (errored || (status.value("completed", false))) return trace;
        // Entry exists but is still running; keep polling.
      }
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      throw TimeoutError("job '" + prompt_id + "' did not settle within " +
                         std::to_string(options.timeout_ms) + " ms");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(options.poll_interval_ms));
  }
}

Registry catalog_from_object_info(const std::string& object_info_json, std::string version,
                                  int* skipped) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(object_info_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw CatalogSyntaxError(std::string("object_info: ") + e.what());
  }
  if (!doc.is_object()) throw CatalogSyntaxError("object_info: expected an object");

  int skip_count = 0;
  std::vector<FunctionSchema> schemas;
  for (const auto& [class_name, info] : doc.items()) {
    if (!is_identifier(class_name)) {
      ++skip_count;
      continue;
    }
    FunctionSchema s;
    s.type_name = class_name;
    s.doc = info.value("description", std::string{});
    s.sink = info.value("output_node", false);

    auto add_inputs = [&](const ordered_json& section, bool required) {
      for (const auto& [name, spec] : section.items()) {
        if (!spec.is_array() || spec.empty() || !is_identifier(name)) continue;
        const auto& head = spec.at(0);
        if (head.is_array()) {
          // Enumerated widget: a choice parameter.
          ParamSpec p;
          p.name = name;
          p.kind = ParamKind::choice;
          for (const auto& c : head) {
            if (c.is_string()) p.choices.push_back(c.get<std::string>());
          }
          if (p.choices.empty()) continue;
          p.required = required;
          p.default_value = ParamValue(p.choices.front());
          s.params.push_back(std::move(p));
          continue;
        }
        if (!head.is_string()) continue;
        const std::string type = head.get<std::string>();
        const ordered_json config =
            spec.size() > 1 && spec.at(1).is_object() ? spec.at(1) : ordered_json::object();

        if (type == "INT" || type == "FLOAT" || type == "STRING" || type == "BOOLEAN") {
          ParamSpec p;
          p.name = name;
          p.required = required;
          if (type == "INT") {
            p.kind = ParamKind::int_;
            if (config.contains("default") && config.at("default").is_number()) {
              p.default_value = ParamValue(config.at("default").get<std::int64_t>());
            }
            if (config.contains("min") && config.contains("max")) {
              p.range = {config.at("min").get<double>(), config.at("max").get<double>()};
            }
          } else if (type == "FLOAT") {
            p.kind = ParamKind::real;
            if (config.contains("default") && config.at("default").is_number()) {
              p.default_value = ParamValue(config.at("default").get<double>());
            }
            if (config.contains("min") && config.contains("max")) {
              p.range = {config.at("min").get<double>(), config.at("max").get<double>()};
            }
          } else if (type == "STRING") {
            p.kind = ParamKind::string;
            if (config.contains("default") && config.at("default").is_string()) {
              p.default_value = ParamValue(config.at("default").get<std::string>());
            }
          } else {
            p.kind = ParamKind::bool_;
            if (config.contains("default") && config.at("default").is_boolean()) {
              p.default_value = ParamValue(config.at("default").get<bool>());
            }
          }
          if (!required && !p.default_value) {
            // The catalog cannot express optionals without defaults.
            switch (p.kind) {
              case ParamKind::int_: p.default_value = ParamValue(std::int64_t{0}); break;
              case ParamKind::real: p.default_value = ParamValue(0.0); break;
              case ParamKind::bool_: p.default_value = ParamValue(false); break;
              default: p.default_value = ParamValue(std::string{});
            }
          }
          if (p.range && p.default_value) {
            double d = *p.default_value->numeric();
            if (d < p.range->first || d > p.range->second) p.default_value = std::nullopt;
            if (!p.default_value) {
              p.default_value = p.kind == ParamKind::int_
                                    ? ParamValue(static_cast<std::int64_t>(p.range->first))
                                    : ParamValue(p.range->first);
            }
          }
          s.params.push_back(std::move(p));
        } else {
          s.inputs.push_back(PortSpec{name, modality_from_comfy_type(type), required});
        }
      }
    };

    const auto input = info.value("input", ordered_json::object());
    add_inputs(input.value("required", ordered_json::object()), true);
    add_inputs(input.value("optional", ordered_json::object()), false);

    const auto outputs = info.value("output", ordered_json::array());
    const auto output_names = info.value("output_name", ordered_json::array());
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      if (!outputs.at(i).is_string()) continue;
      std::string type = outputs.at(i).get<std::string>();
      std::string name = i < output_names.size() && output_names.at(i).is_string()
                             ? output_names.at(i).get<std::string>()
                             : type;
      if (!is_identifier(name)) name = "out" + std::to_string(i);
      if (s.find_output(name)) name += "_" + std::to_string(i);
      s.outputs.push_back(PortSpec{name, modality_from_comfy_type(type), true});
    }
    if (s.outputs.empty()) {
      // Pure sink on the wire; give it a nominal completion output.
      s.outputs.push_back(PortSpec{"done", Modality::text, true});
    }
    schemas.push_back(std::move(s));
  }
  if (skipped) *skipped = skip_count;
  return Registry(std::move(version), std::move(schemas));
}

Registry sync_catalog(const std::string& endpoint, std::string version) {
  httplib::Client client(endpoint);
  client.set_connection_timeout(10, 0);
  auto got = client.Get("/object_info");
  if (!got) {
    throw NetworkError("cannot reach '" + endpoint + "': " + httplib::to_string(got.error()));
  }
  if (got->status != 200) {
    throw NetworkError("GET /object_info returned status " + std::to_string(got->status));
  }
  return catalog_from_object_info(got->body, std::move(version));
}

}  // namespace aflow
