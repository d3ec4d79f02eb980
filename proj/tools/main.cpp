#include <iostream>

#include "qxot/cli.hpp"

int main(int argc, char** argv) {
  return qxot::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
