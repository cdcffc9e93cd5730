#include <string>
#include <vector>

#include "esplace/cli.hpp"

int main(int argc, char** argv) {
  return esplace::run_command(std::vector<std::string>(argv, argv + argc));
}
