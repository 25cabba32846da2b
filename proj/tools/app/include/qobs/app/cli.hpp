#pragma once

#include <iosfwd>

namespace qobs::app {

/// The qobs command line. Returns the process exit code (see commands.hpp).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qobs::app
