#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "aflow/executor.hpp"
#include "aflow/ir.hpp"
#include "aflow/registry.hpp"
#include "aflow/syntax.hpp"

namespace testutil {

// Independent evaluation route: recurse over incoming flows and restate the
// token rule from scratch (own FNV-1a, own parameter resolution), so both
// the scheduler and the backend hash are cross-checked.
class RecursiveOracle {
 public:
  RecursiveOracle(const aflow::Workflow& w, const aflow::Registry& r,
                  const aflow::SeedMap& seeds)
      : w_(w), r_(r), seeds_(seeds) {}

  std::string token(const std::string& node_id, const std::string& port) {
    auto key = node_id + "\n" + port;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    const aflow::NodeInstance& node = *w_.find_node(node_id);
    const aflow::FunctionSchema& schema = r_.lookup(node.type_name);

    aflow::ParamMap params;
    for (const auto& spec : schema.params) {
      const aflow::ParamValue* given = node.param(spec.name);
      if (given) {
        if (spec.kind == aflow::ParamKind::real && given->is_integer()) {
          params.emplace_back(spec.name,
                              aflow::ParamValue(static_cast<double>(given->as_integer())));
        } else {
          params.emplace_back(spec.name, *given);
        }
      } else {
        params.emplace_back(spec.name, *spec.default_value);
      }
    }
    std::sort(params.begin(), params.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<std::string> input_tokens;
    for (const auto& e : w_.incoming_flows(node_id)) {
      input_tokens.push_back(token(e.src.node_id, e.src.port_name));
    }
    std::sort(input_tokens.begin(), input_tokens.end());

    std::string enc = node.type_name + "|";
    for (const auto& [k, v] : params) enc += k + "=" + aflow::render_literal(v) + ";";
    enc += "|";
    for (const auto& t : input_tokens) enc += t + ",";
    enc += "|" + port;
    if (auto it = seeds_.find(node_id); it != seeds_.end()) {
      enc += "|seed=" + std::to_string(it->second);
    }

    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : enc) {
      h ^= c;
      h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    memo_[key] = buf;
    return buf;
  }

 private:
  const aflow::Workflow& w_;
  const aflow::Registry& r_;
  const aflow::SeedMap& seeds_;
  std::map<std::string, std::string> memo_;
};

}  // namespace testutil
