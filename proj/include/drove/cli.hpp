#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drove {

enum ExitCode : int { EXIT_OK = 0, EXIT_INPUT = 2, EXIT_NONCONVERGED = 3 };

/// Entry point of the `drove` executable; `args` excludes the program name.
/// Messages go to `out` / `err`.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
int run_cli(int argc, char **argv);

} // namespace drove
