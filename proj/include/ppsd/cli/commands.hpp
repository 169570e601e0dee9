#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ppsd/cli/model_io.hpp"
#include "ppsd/cli/output.hpp"
#include "ppsd/lindblad.hpp"

namespace ppsd::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kNumericalError = 3, kMismatch = 4 };

struct RunConfig {
  ModelSource source;
  std::string state = "ground";
  double t_max = 1.0;
  int n_steps = 100;
  Method method = Method::exact_exponential;
  std::uint64_t seed = 0;
  std::string output_path;
  std::string format = "csv";

  /// Throws InputError unless t_max > 0, n_steps >= 2 and the format is known.
  void validate() const;
};

ResultRecord cmd_simulate(const RunConfig& config);

/// t_max <= 0 selects one residual time scale.
ResultRecord cmd_ppsd_check(const ModelSource& source, const std::string& state, double t_max, int n_steps,
                            double tol);

ResultRecord cmd_ppsd_search(const ModelSource& source, int restarts, std::uint64_t seed, double tol);

/// Targets: eq3 eq5 eq16 fig2 fig3 b13 b16 grw coherent.
ResultRecord cmd_reproduce(const std::string& target);
const std::vector<std::string>& reproduce_targets();

ResultRecord cmd_list_models();

/// Parses argv, runs one subcommand and returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ppsd::cli
