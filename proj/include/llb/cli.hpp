#pragma once

#include <string>
#include <vector>

namespace llb {

// Command-line front end.  Exit codes: 0 success, 1 a verification check or
// the run itself failed, 2 usage or configuration errors.  Human-readable
// progress goes to stderr; data goes to files (simulate) or stdout (verify,
// gn, convergence tables).
int cli_main(int argc, const char* const* argv);

// Convenience overload for in-process tests; args exclude argv[0].
int cli_main(const std::vector<std::string>& args);

}  // namespace llb
