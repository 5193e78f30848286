#ifndef ROADS_TOOLS_CLI_H_
#define ROADS_TOOLS_CLI_H_

#include <ostream>

namespace roads::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Entry point of the `roads` tool. Subcommands: gen, ingest, train, predict,
// evaluate, reorient, serve.
int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace roads::cli

#endif  // ROADS_TOOLS_CLI_H_
