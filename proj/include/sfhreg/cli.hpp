#pragma once

#include <iosfwd>

namespace sfhreg {

// Entry point behind the `sfhreg` executable: gen | train | eval | compare.
// Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sfhreg
