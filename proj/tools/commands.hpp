#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dmc::cli {

inline constexpr int report_format_version = 1;

enum exit_code : int {
  exit_ok = 0,
  exit_reject = 1,
  exit_inconclusive = 2,
  exit_invalid = 3,
  exit_input_error = 4,
};

// Runs the dmc command line; args excludes the program name. Reports go to
// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dmc::cli
