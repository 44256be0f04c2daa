#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace artc::cli {

/// Parses arguments and runs one subcommand. Returns the process exit status;
/// usage goes to `out`, errors to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace artc::cli
