#include <iostream>

#include "noisylab/config.hpp"

int main(int argc, char** argv) {
  return noisylab::cli::run_cli(argc, argv, std::cout, std::cerr);
}
