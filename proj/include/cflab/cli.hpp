#pragma once

#include <string>
#include <vector>

namespace cflab::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsage = 1,
    kFeasibility = 2,
    kViolation = 3,
    kIo = 4,
};

/// Runs the cf_lab command line; `args` excludes the program name.
int run(const std::vector<std::string>& args);

int main(int argc, char** argv);

} // namespace cflab::cli
