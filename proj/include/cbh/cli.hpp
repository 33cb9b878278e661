// Command-line driver: configuration, commands, and file output.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cbh/model.hpp"

namespace cbh {

struct RunConfig {
  std::string command;  // spectrum, doublon, regions, eigenstate, evolve
  ModelParams params;
  std::optional<int> p_index;  // none means all sectors
  int p_grid = 64;             // doublon momentum samples on [-pi, pi)
  std::string output_dir = ".";
  std::string format = "csv";  // csv or json
  // evolve
  std::string initial = "ab00";
  double t_max = 40;
  double dt_out = 0.1;
  std::string method = "spectral";
  // eigenstate: one state by position in the sector, all when unset
  std::optional<int> state_index;
  // sweep over (U, Omega); U sets U1 = U2. Empty lists keep the base value.
  std::vector<double> sweep_u, sweep_omega;

  void validate() const;
};

// Keys: command, params, p, all_p, p_grid, out, format, initial, t_max, dt_out, method,
// state, sweep {u, omega}. Unknown keys throw Config naming the key.
RunConfig config_from_json(const std::string& text);

inline constexpr int kExitOk = 0, kExitConfig = 2, kExitSolver = 3;

// Runs the command (and sweep), writes tables plus manifest.json. Returns an exit code.
int run(const RunConfig& cfg, std::ostream& log);

int cli_main(int argc, char** argv);

}  // namespace cbh
