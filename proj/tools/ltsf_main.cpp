#include <iostream>
#include <vector>

#include "ltsf/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return ltsf::dispatch(args, std::cout, std::cerr);
}
