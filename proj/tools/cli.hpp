#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace flareforge::cli {

// Runs the command line `args` (args[0] is the program name). Normal output
// goes to `out`; failures print one JSON object {error_kind, message} to
// `err`. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flareforge::cli
