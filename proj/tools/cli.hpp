#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tvn::cli {

enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kUsage = 2,
  kIo = 3,
  kTransport = 4,
  kProtocol = 5,
  kPipeline = 6,
  kInvalidGenome = 7,
};

// Runs one command line (args excludes the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tvn::cli
