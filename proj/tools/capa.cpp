#include <string>
#include <vector>

#include "cli_main.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return capa::cli_main(args);
}
