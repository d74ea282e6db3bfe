#include <iostream>
#include <string>
#include <vector>

#include "uavgeo/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return uavgeo::RunCli(args, std::cout, std::cerr);
}
