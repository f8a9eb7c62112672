#include <iostream>
#include <vector>

#include "mst/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mst::cli::run_cli(args, std::cout, std::cerr);
}
