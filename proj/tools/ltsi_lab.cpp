#include "ltsi/cli.hpp"

int main(int argc, char** argv) {
  return ltsi::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
