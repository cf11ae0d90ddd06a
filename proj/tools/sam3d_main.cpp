#include <iostream>
#include <string>
#include <vector>

#include "sam3d/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sam3d::run_cli(args, std::cout, std::cerr);
}
