#pragma once

namespace scopf {

// Command-line entry point shared by the binary and the tests.
// Returns 0 on success, 1 on solve/validation failure, 2 on usage errors.
int run_cli(int argc, const char* const* argv);

}  // namespace scopf
