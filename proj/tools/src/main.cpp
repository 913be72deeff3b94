#include <iostream>
#include <string>
#include <vector>

#include "distdyk_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return distdyk::cli::run_cli(args, std::cout, std::cerr);
}
