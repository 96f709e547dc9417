#include "aflow/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aflow/errors.hpp"

namespace aflow {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string parse_toml_string(const std::string& raw, int line_no) {
  if (raw.size() < 2 || raw.back() != '"') {
    throw ConfigError("config line " + std::to_string(line_no) + ": unterminated string");
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    if (raw[i] == '\\' && i + 2 < raw.size()) {
      char e = raw[++i];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: out += e;
      }
    } else {
      out += raw[i];
    }
  }
  return out;
}

int parse_toml_int(const std::string& raw, int line_no) {
  try {
    return std::stoi(raw);
  } catch (const std::exception&) {
    throw ConfigError("config line " + std::to_string(line_no) + ": expected an integer, got '" +
                      raw + "'");
  }
}

}  // namespace

CliConfig parse_config_toml(const std::string& text) {
  CliConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    // Strip trailing comments outside strings.
    bool in_string = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] == '"' && (i == 0 || t[i - 1] != '\\')) in_string = !in_string;
      if (t[i] == '#' && !in_string) {
        t = trim(t.substr(0, i));
        break;
      }
    }
    if (t.empty() || t.front() == '[') continue;

    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string raw = trim(t.substr(eq + 1));
    if (raw.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty value");
    }

    auto as_string = [&] {
      if (raw.front() == '"') return parse_toml_string(raw, line_no);
      return raw;
    };

    if (key == "catalog") {
      config.catalog = as_string();
    } else if (key == "syntax") {
      auto s = style_from_string(as_string());
      if (!s) throw ConfigError("config line " + std::to_string(line_no) + ": unknown syntax");
      config.syntax = s;
    } else if (key == "lm_url") {
      config.lm_url = as_string();
    } else if (key == "lm_model") {
      config.lm_model = as_string();
    } else if (key == "lm_key") {
      config.lm_key = as_string();
    } else if (key == "embed_model") {
      config.embed_model = as_string();
    } else if (key == "comfy_url") {
      config.comfy_url = as_string();
    } else if (key == "iteration_limit") {
      config.iteration_limit = parse_toml_int(raw, line_no);
    } else if (key == "format") {
      config.format = as_string();
      if (config.format != "text" && config.format != "json") {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": format must be text or json");
      }
    } else if (key == "poll_interval_ms") {
      config.poll_interval_ms = parse_toml_int(raw, line_no);
    } else if (key == "timeout_ms") {
      config.timeout_ms = parse_toml_int(raw, line_no);
    } else {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return config;
}

CliConfig load_cli_config(const std::string& path) {
  CliConfig config;
  std::string file = path.empty() ? "aflow.toml" : path;
  if (std::filesystem::exists(file)) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    config = parse_config_toml(buf.str());
  } else if (!path.empty()) {
    throw ConfigError("config file '" + path + "' not found");
  }

  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("AFLOW_LM_URL")) config.lm_url = *v;
  if (auto v = env("AFLOW_LM_MODEL")) config.lm_model = *v;
  if (auto v = env("AFLOW_LM_KEY")) config.lm_key = *v;
  if (auto v = env("AFLOW_EMBED_MODEL")) config.embed_model = *v;
  if (auto v = env("AFLOW_COMFY_URL")) config.comfy_url = *v;
  return config;
}

}  // namespace aflow
