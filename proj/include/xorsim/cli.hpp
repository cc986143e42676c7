#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xorsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSimulation = 1;
inline constexpr int kExitConfig = 2;

// Environment variable naming the config file used when --config is absent.
inline constexpr const char* kConfigEnvVar = "XORSIM_CONFIG";

// Full command line including argv[0]. Never throws; returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "50-59", "3", "0,2,4-6".
std::vector<int> parse_seed_list(const std::string& text);

} // namespace xorsim
