#ifndef NATDISC_CLI_H_
#define NATDISC_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace natdisc {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. |args| excludes the program name. Every run that gets
// past argument parsing writes <out>/manifest-<subcommand>.json.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace natdisc

#endif  // NATDISC_CLI_H_
