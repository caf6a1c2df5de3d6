#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rowsolve {

/// Entry point of the `rowsolve` tool. Subcommands: gen, solve, bench,
/// rates, lemmas. Returns 0 on success, 1 on usage errors, 2 on data errors.
int cli_main(int argc, char** argv);
/// Same, with explicit arguments (args[0] is the program name) and streams.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rowsolve
