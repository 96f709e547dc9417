#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "aflow/inference.hpp"
#include "aflow/registry.hpp"

namespace testutil {

inline std::string repo_path(const std::string& rel) {
  return std::string(REPO_ROOT) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline const aflow::Registry& main_registry() {
  static aflow::Registry reg = aflow::load_catalog_file(repo_path("catalog/test.json"));
  return reg;
}

inline const aflow::ReferenceStore& refs_store() {
  static aflow::ReferenceStore store = [] {
    aflow::ScriptedLm embedder({});
    return aflow::load_reference_store(repo_path("refs"), embedder, main_registry());
  }();
  return store;
}

}  // namespace testutil
