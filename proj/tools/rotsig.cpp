#include <iostream>

#include "rotsig/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rotsig::run_cli(args, std::cout, std::cerr);
}
