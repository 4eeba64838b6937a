#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace diffcone {

struct CliStreams {
  std::ostream& out;
  std::ostream& err;
  // Selects the default --format (table on a terminal, tsv otherwise).
  bool out_is_terminal = false;
};

// Runs one command line (args excludes the program name) and returns the
// process exit status. Data goes to `out` (or --out), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, const CliStreams& streams);

}  // namespace diffcone
