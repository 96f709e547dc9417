#pragma once

#include <optional>
#include <string>

#include "aflow/syntax.hpp"

namespace aflow {

// Resolved tool configuration. Precedence: command-line flags override
// environment variables override the config file.
struct CliConfig {
  std::string catalog = "catalog/test.json";
  std::optional<SyntaxStyle> syntax;
  std::string lm_url;
  std::string lm_model;
  std::string lm_key;
  std::string embed_model;
  std::string comfy_url;
  int iteration_limit = 3;
  std::string format = "text";  // text | json
  int poll_interval_ms = 1000;
  int timeout_ms = 600000;
};

// Parses the flat TOML subset used by aflow.toml: `key = value` lines with
// string/integer/float/boolean values, `#` comments, section headers
// ignored. Unknown keys raise ConfigError.
CliConfig parse_config_toml(const std::string& text);

// Loads `path` when given (ConfigError if missing), otherwise ./aflow.toml
// when present, then applies the AFLOW_* environment overrides.
CliConfig load_cli_config(const std::string& path = {});

}  // namespace aflow
