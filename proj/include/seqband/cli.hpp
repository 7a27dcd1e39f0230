#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seqband {

/// Command-line entry point: simulate | fit | band | quantiles | coverage.
/// Returns 0 on success, 2 on invalid input, 3 on numerical failure.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace seqband
