#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lowlat {

/// Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.
int cli_main(int argc, char** argv);

/// Same, with `args` excluding the program name and explicit streams for testing.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lowlat
