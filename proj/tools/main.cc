#include <iostream>
#include <string>
#include <vector>

#include "natdisc/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return natdisc::RunCli(args, std::cout, std::cerr);
}
