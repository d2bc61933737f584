#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace instanton::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kEquilibriumInfeasible = 2,
  kAllInfeasible = 3,
};

/// Options of the scan subcommand. Loadable from a JSON file whose keys match
/// the field names; command-line flags override file values.
struct ScanConfig {
  std::string grid;
  std::string cost = "white-gaussian";
  std::size_t amoeba_restarts = 0;  // 0 disables the amoeba cross-check
  std::uint64_t seed = 0;
  std::string out;
  unsigned jobs = 1;
  double kkt_tolerance = 1e-8;  // may only be loosened
  std::size_t top = 3;
  std::optional<std::string> dump_facets;
};

ScanConfig load_scan_config(const std::string& path);
/// Throws instanton::ValidationError for an unusable configuration.
void validate(const ScanConfig& config);

int cmd_scan(const ScanConfig& config, std::ostream& out, std::ostream& err);
int cmd_extend(const std::string& base, std::size_t n_new, double penetration, std::uint64_t seed,
               const std::string& out_path, std::ostream& out, std::ostream& err);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace instanton::cli
