#include <string>
#include <vector>

#include "kramers/cli.hpp"

int main(int argc, char** argv) {
  return kramers::run_command(std::vector<std::string>(argv, argv + argc));
}
