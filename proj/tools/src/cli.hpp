#pragma once

#include <ostream>

namespace windgat::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,  // bad flags or config
  kDataError = 2,   // unreadable or inconsistent data, IO failures
  kNumericError = 3,
};

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace windgat::cli
