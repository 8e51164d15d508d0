#include <iostream>
#include <string>
#include <vector>

#include "defgeo/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return defgeo::cli_main(args, std::cout, std::cerr);
}
