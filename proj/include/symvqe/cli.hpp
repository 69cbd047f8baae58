#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace symvqe {

/// Exit codes: 0 success, 2 validation error, 3 runtime/numeric failure.
struct CliError : std::runtime_error {
  int exit_code;
  CliError(int code, const std::string& message)
      : std::runtime_error(message), exit_code(code) {}
};

/// Validated invocation: exactly one subcommand plus its resolved options
/// (config file values overridden by explicit flags).
struct CliInvocation {
  std::string subcommand;

  std::string fcidump;
  std::string fcidump_dir;
  std::vector<double> distances;
  std::string ansatz = "aswap";
  int n_particles = 2;
  double sz = 0.0;
  int depth = 1;
  std::string entanglement = "full";
  int layers = 1;
  int n_qubits = 4;
  std::string backend = "statevector";
  std::string device_path;
  long shots = 8192;
  std::string optimizer;
  long budget = 300;
  int starts = 1;
  std::string mitigate;
  std::vector<long> folds = {1, 3, 5};
  std::string strategies = "none,re,sy,spam,spamre,spamsy,spamsyre";
  std::uint64_t seed = 0;
  std::string out = "out";
  int jobs = 0;  ///< 0 means all available cores
  bool dry_run = false;

  std::string resolved_json() const;
};

/// Parse argv into a validated invocation. Throws CliError (exit code 2) on
/// unknown subcommands or flags, invalid values, or missing required inputs.
CliInvocation parse_and_validate(const std::vector<std::string>& args);

/// Execute the invocation, writing CSV/JSON artifacts and a manifest to the
/// output directory. Returns the process exit code.
int run_subcommand(const CliInvocation& inv);

int cli_main(int argc, const char* const* argv);

}  // namespace symvqe
