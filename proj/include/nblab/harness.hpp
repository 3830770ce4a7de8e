#pragma once

#include "nblab/domain.hpp"
#include "nblab/pde_solver.hpp"
#include "nblab/report.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nblab::harness {

inline constexpr const char* kToolVersion = "1.0.0";

// Exit codes: 1 is a completed check that failed (verify-super only).
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

struct RunOptions {
  std::filesystem::path out_dir = "nblab_out";
  bool reproducible = false;
  int workers = 1;
  std::uint64_t seed = 0;  // reserved
  bool waive_compatibility = false;
  bool write_files = true;
};

struct RunManifest {
  std::string config_hash;  // FNV-1a of the canonical config dump
  std::string tool_version = kToolVersion;
  std::string subcommand;
  json config;              // the config as given
  json resolved;            // every parameter after defaults were applied
  std::vector<std::string> outputs;
};

json to_json(const RunManifest& m);

struct CommandResult {
  int exit_code = kExitOk;
  json report;
  RunManifest manifest;
};

/// Throws ConfigError on malformed JSON. A manifest is unwrapped to the config it recorded.
json parse_config(const std::string& text);
json load_config(const std::filesystem::path& path);

const std::vector<std::string>& subcommands();

/// Dispatches, writes artifacts plus manifest.json under opt.out_dir and maps errors to exit codes
/// (message on `err`).
CommandResult run(const std::string& subcommand, const json& config, const RunOptions& opt, std::ostream& err);

// The commands throw; run() catches.
CommandResult cmd_solve(const json& config, const RunOptions& opt);
CommandResult cmd_criteria(const json& config, const RunOptions& opt);
CommandResult cmd_sweep(const json& config, const RunOptions& opt);
CommandResult cmd_verify_super(const json& config, const RunOptions& opt);
CommandResult cmd_boundedness_check(const json& config, const RunOptions& opt);
CommandResult cmd_localize(const json& config, const RunOptions& opt);
CommandResult cmd_ode_compare(const json& config, const RunOptions& opt);
CommandResult cmd_counterexample(const json& config, const RunOptions& opt);

/// The criteria pass on its own: regime, thresholds, the all-nontrivial criterion and the
/// small-data constructions. Verdict is one of AllGlobal, BlowsUpForAllNontrivial,
/// BlowsUpAboveThreshold, SmallDataGlobal, NoVerdict.
json criteria_report(const ProblemSpec& spec, const Grid1D& grid, const json& options = json::object());

}  // namespace nblab::harness
