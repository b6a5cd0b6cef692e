#include <iostream>
#include <string>
#include <vector>

#include "pggan/cli.hpp"

int main(int argc, char** argv) {
  return pggan::cmd_dispatch(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
