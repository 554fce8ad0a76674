#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fbmdrift {

//! Runs one `fbmdrift` invocation. `args` excludes the program name.
//!
//! Exit status: 0 success, 1 I/O failure, 2 usage or validation error (a JSON
//! object {"error", "message"} is written to `err`), 3 when fbm-selftest fails.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fbmdrift
