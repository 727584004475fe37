#include <iostream>
#include <string>
#include <vector>

#include "fwkb/pipeline.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fwkb::run_cli(args, std::cout, std::cerr);
}
