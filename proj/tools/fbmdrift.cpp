#include <iostream>
#include <string>
#include <vector>

#include "fbmdrift/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fbmdrift::dispatch(args, std::cout, std::cerr);
}
