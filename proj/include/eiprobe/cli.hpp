#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eiprobe {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Entry point of the eiprobe tool. `args` excludes the program name. Data
// goes to the files named by --out (or `out` with --stdout); progress,
// warnings and errors go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace eiprobe
