#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sam3d {

// Process exit codes of the sam3d tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 2,
  kExitConfig = 3,
  kExitSegmenter = 4,
  kExitFrameMismatch = 5,
  kExitPlacement = 6,
};

/// Entry point of the command-line tool; args excludes the program name.
/// Subcommands: rasterize | detect | eval | synth.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sam3d
