#include <iostream>
#include <string>
#include <vector>

#include "tailbound/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return tailbound::cli::main(args, std::cout, std::cerr);
}
