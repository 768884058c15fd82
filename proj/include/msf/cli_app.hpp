#ifndef MSF_CLI_APP_HPP
#define MSF_CLI_APP_HPP

namespace msf {

// Full CLI entry point (argument parsing, config handling, report writing).
// Split from main() so the test suite can drive it in-process.
// Exit codes: 0 ok, 2 validation error, 3 numerical failure, 4 check-suite
// tolerance failure.
int run_cli(int argc, const char* const* argv);

}  // namespace msf

#endif
