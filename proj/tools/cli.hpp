#pragma once

#include <ostream>

namespace chernlab::cli {

// Parses and runs one command line. JSON lines go to `out`, the human
// summary and diagnostics to `err`. Returns 0 when every check passes, 1 on a
// failed or unreliable check, 2 on a usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace chernlab::cli
