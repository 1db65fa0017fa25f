#pragma once

#include <iosfwd>

namespace mlmrt {

// Entry point of the `mlmrt` tool. Returns the process exit code: 0 ok,
// 2 config or data error, 3 infeasible request, 4 environment failure.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace mlmrt
