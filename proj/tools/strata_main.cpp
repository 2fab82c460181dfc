#include <iostream>

#include "strata/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return strata::runCli(args, std::cout, std::cerr);
}
