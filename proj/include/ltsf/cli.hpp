#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ltsf {

/// Runs one CLI invocation. `args` excludes the program name. Returns the
/// process exit code: 0 success, 1 usage error, 2 data error, 3 numerical
/// failure. Normal output goes to `out`, diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace ltsf
