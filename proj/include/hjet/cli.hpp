#ifndef HJET_CLI_HPP
#define HJET_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace hjet::cli {

/// Exit codes: 0 solution/success, 1 not_solution, 2 input error,
/// 3 numerical failure, 4 inconclusive.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace hjet::cli

#endif  // HJET_CLI_HPP
