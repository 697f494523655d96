#include <iostream>

#include "rumorperc/cli.hpp"

int main(int argc, char** argv) {
  return rumorperc::run_command(argc, argv, std::cout, std::cerr);
}
