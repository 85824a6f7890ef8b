#pragma once

#include <string>

#include <json.hpp>

#include "irw/boehm.hpp"
#include "irw/develop.hpp"
#include "irw/parse.hpp"
#include "irw/reduction.hpp"

namespace irw {

struct SessionConfig {
  std::string trs_path;
  std::string term;                  // named term or inline expression
  std::string strategy = "outermost";
  std::string strategy2;             // join: second strategy
  std::string redexes;               // occurrence set, e.g. "{0, 1.0}" or "@node:f"
  std::string witness;               // RA witness override (term expression)
  std::string mode = "strong-p";     // limit mode
  std::string corpus_dir = "corpus";
  size_t budget = kDefaultBudget;
  uint32_t depth = kDefaultDepth;
  size_t fuel = kDefaultFuel;
  uint64_t seed = 0;
  bool json = false;
  bool dot = false;  // develop: emit the path automaton as DOT
};

struct CommandOutput {
  int exit_code = 0;
  std::string text;          // human-readable report
  nlohmann::json data;       // schema-versioned machine output
};

CommandOutput cmd_check(const SessionConfig& cfg);
CommandOutput cmd_reduce(const SessionConfig& cfg);
CommandOutput cmd_limit(const SessionConfig& cfg);
CommandOutput cmd_develop(const SessionConfig& cfg);
CommandOutput cmd_residuals(const SessionConfig& cfg);
CommandOutput cmd_boehm(const SessionConfig& cfg);
CommandOutput cmd_join(const SessionConfig& cfg);
CommandOutput cmd_corpus(const SessionConfig& cfg);

// Runs a subcommand, mapping Error exceptions to exit code 1 with a stable
// machine-readable code.
CommandOutput dispatch(const std::string& command, const SessionConfig& cfg);

// Serialization helpers (stable across runs).
nlohmann::json limit_to_json(const LimitOutcome& out);
std::string certificate_name(Certificate c);

}  // namespace irw
