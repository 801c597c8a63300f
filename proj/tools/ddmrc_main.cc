#include <iostream>
#include <string>
#include <vector>

#include "ddmrc/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ddmrc::run_cli(args, std::cout, std::cerr);
}
