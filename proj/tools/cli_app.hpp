#pragma once

#include <string>
#include <vector>

// Full command-line entry point, callable in-process so tests can drive the
// real subcommands without spawning. Returns the process exit code:
//   0 success, 2 bad configuration or usage, 3 bad data, 4 no signal,
//   1 unexpected failure.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args);
