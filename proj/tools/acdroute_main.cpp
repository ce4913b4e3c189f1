#include <iostream>
#include <string>
#include <vector>

#include "acdroute/cli.hpp"

int main(int argc, char** argv) {
  return acdroute::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
