#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kramers {

enum ExitCode : int { kExitOk = 0, kExitPipeline = 1, kExitConfig = 2 };

// args[0] is the program name
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(const std::vector<std::string>& args);

}  // namespace kramers
