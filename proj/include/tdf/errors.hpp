#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tdf {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed document: not parseable against the .df.json schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A named graph-invariant violation. Violations are data: validate() returns
// them as a list, parse-time checking throws ValidationError carrying them.
struct Violation {
  std::string element;  // offending actor/edge/port id
  std::string rule;     // short rule name, e.g. "width-mismatch"
  std::string detail;

  std::string str() const { return element + ": " + rule + ": " + detail; }
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<Violation>& vs) {
    std::string out = "graph validation failed:";
    for (const auto& v : vs) out += "\n  " + v.str();
    return out;
  }
  std::vector<Violation> violations_;
};

// merge(): same actor id used with a different kind or different params.
class MergeConflict : public Error {
 public:
  using Error::Error;
};

// merge(): same actor id used with an incompatible port structure.
class ArityConflict : public Error {
 public:
  using Error::Error;
};

// extract_config() on a config id absent from the table.
class UnknownConfig : public Error {
 public:
  using Error::Error;
};

// A tag was used without a configuration, or with an invalid one.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A token reached a switching box whose route table has no entry for the
// token's (tag, config) pair.
class UnroutableToken : public Error {
 public:
  using Error::Error;
};

// A kernel rejected its consumed payloads (e.g. wrong length).
class KernelError : public Error {
 public:
  using Error::Error;
};

// fifo_pop for a tag that has no token in the FIFO.
class EmptyForTag : public Error {
 public:
  using Error::Error;
};

class KeyLengthError : public Error {
 public:
  using Error::Error;
};

// Workload file problems; carries the 1-based line number when known.
class WorkloadError : public Error {
 public:
  WorkloadError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class MissingProfile : public Error {
 public:
  using Error::Error;
};

class ZeroPower : public Error {
 public:
  using Error::Error;
};

}  // namespace tdf
