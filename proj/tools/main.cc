#include <iostream>
#include <string>
#include <vector>

#include "treesrl/cli.h"

int main(int argc, char** argv) {
  return treesrl::cli::Run(std::vector<std::string>(argv + 1, argv + argc), std::cin, std::cout,
                           std::cerr);
}
