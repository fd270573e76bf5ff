#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cylsfm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand; args excludes the program name. Failures print a
/// single "error: ..." line on err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cylsfm::cli
