#pragma once

#include <vector>

#include "aflow/diagnostics.hpp"
#include "aflow/ir.hpp"
#include "aflow/registry.hpp"

namespace aflow {

// Semantic checks over a structurally valid workflow, in taxonomy order:
//   (a) every node type resolves in the registry          → UnknownFunction
//   (b) parameters resolve against the schema             → InvalidParameter
//   (c) edge ports exist and modalities are compatible    → ConnectionError
//   (d) every required input port is fed                  → TopologicalGap
//   (e) graph is acyclic (Error) and, when sink-typed nodes are present,
//       every node reaches one (Warning otherwise)        → CycleOrUnreachable
//
// Returns ALL findings, deterministically ordered by (category, location,
// message). Pure function of its inputs.
std::vector<Diagnostic> check(const Workflow& w, const Registry& r);

}  // namespace aflow
