#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pickling::app {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitModel = 3,
    kExitInfeasible = 10,
};

inline constexpr const char* kConfigEnv = "PICKLING_CONFIG";
inline constexpr const char* kBindEnv = "PICKLING_BIND";
inline constexpr const char* kReportFile = "training_report.txt";

// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pickling::app
