#include <iostream>
#include <string>
#include <vector>

#include "manifoldrank/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return manifoldrank::run_cli(args, std::cout, std::cerr);
}
