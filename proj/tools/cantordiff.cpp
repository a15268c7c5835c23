#include <iostream>
#include <string>
#include <vector>

#include "cantordiff/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cantordiff::main_entry(args, std::cout, std::cerr);
}
