#include <iostream>
#include <string>
#include <vector>

#include "eiprobe/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return eiprobe::run_cli(args, std::cout, std::cerr);
}
