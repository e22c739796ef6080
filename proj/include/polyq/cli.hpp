#pragma once

namespace polyq {

// full command-line entry point; returns the process exit code
// (0 ok, 2 config error, 3 enumeration budget exceeded, 4 unconverged with --strict)
int run_cli(int argc, const char* const* argv);

}  // namespace polyq
