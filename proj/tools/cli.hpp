#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace respdens::cli {

//! Runs one command line (args exclude the program name) and returns the
//! process exit code: 0 success, 2 configuration error, 3 numerical
//! failure, 4 invariant failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace respdens::cli
