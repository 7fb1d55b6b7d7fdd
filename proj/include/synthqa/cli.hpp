#pragma once

#include <iosfwd>

namespace synthqa {

// Entry point of the synthqa binary. Exit codes: 0 success, 2 usage or data
// error, 3 internal error.
int run_cli(int argc, char** argv);
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace synthqa
