#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace targeted::cli {

/// Runs one subcommand. `args` excludes the program name.
/// Returns 0 on success, 1 on a usage error, 2 on a computation error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace targeted::cli
