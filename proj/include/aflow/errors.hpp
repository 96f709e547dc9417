#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace aflow {

// Base class for all toolkit exceptions. Operations that report recoverable
// problems (parsing, validation, parameter resolution) return Diagnostics
// instead; exceptions are reserved for contract violations and I/O.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DuplicateNodeId : public Error { public: using Error::Error; };
class UnknownNode : public Error { public: using Error::Error; };
class InputOccupied : public Error { public: using Error::Error; };
class UnknownEdge : public Error { public: using Error::Error; };
class InvalidIdentifier : public Error { public: using Error::Error; };
class InvalidValue : public Error { public: using Error::Error; };

// Graph has at least one directed cycle; `cycle` lists the node ids on one
// of them, rotated so the lexicographically smallest id comes first.
class CycleError : public Error {
 public:
  CycleError(std::string message, std::vector<std::string> cycle_nodes)
      : Error(std::move(message)), cycle(std::move(cycle_nodes)) {}
  std::vector<std::string> cycle;
};

class CatalogSyntaxError : public Error { public: using Error::Error; };
class DuplicateTypeName : public Error { public: using Error::Error; };
class InvalidSpec : public Error { public: using Error::Error; };
class UnknownFunctionError : public Error { public: using Error::Error; };

class UnrepresentableWorkflow : public Error { public: using Error::Error; };

class PreconditionViolated : public Error { public: using Error::Error; };
class ExportUnsupported : public Error { public: using Error::Error; };
class ImportError : public Error { public: using Error::Error; };
class NetworkError : public Error { public: using Error::Error; };
class TimeoutError : public Error { public: using Error::Error; };

class LmError : public Error { public: using Error::Error; };
class EmptyResponse : public Error { public: using Error::Error; };
class EmptyStore : public Error { public: using Error::Error; };
class IterationLimitReached : public Error { public: using Error::Error; };

class MismatchedCaseSets : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

}  // namespace aflow
