#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace uavgeo {

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

// Runs the command line tool. args excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace uavgeo
