#include <vector>
#include <string>
#include "vemc/cli.hpp"

int main(int argc, char** argv) {
  return vemc::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}
