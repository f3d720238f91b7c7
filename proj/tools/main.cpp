#include <iostream>
#include <string>
#include <vector>

#include "stppm/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return stppm::cli::run(args, std::cout, std::cerr);
}
