#include <iostream>

#include "fpd/cli.hpp"

int main(int argc, char** argv) {
  return fpd::run_cli(argc, argv, std::cout, std::cerr);
}
