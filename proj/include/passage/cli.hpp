#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace passage {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitParameter = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one `passage` command. args excludes the program name. Data goes to out,
/// diagnostics to err. seed_env is the value of PASSAGE_SEED, if set.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const char* seed_env = nullptr);

}  // namespace passage
