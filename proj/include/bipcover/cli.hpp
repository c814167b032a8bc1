#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bipcover {

// Entry point of the bipcover tool. `args` excludes the program name.
// Returns 0 on success, 1 when a check fails, 2 on usage or domain errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bipcover
