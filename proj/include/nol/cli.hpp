#pragma once

namespace nol {

/// Entry point of the `nol` tool. Returns the process exit code: 0 on
/// success, 2 on usage or input errors, 3 on internal invariant violations.
int run_cli(int argc, char** argv);

}  // namespace nol
