#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gramrig::cli {

enum ExitCode : int {
    kSuccess = 0,
    kFlexible = 1,
    kUsage = 2,
    kNumerical = 3,
};

/// Runs one command line. args[0] is the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gramrig::cli
