#include <string>
#include <vector>

#include "graphite/cli/commands.hpp"

int main(int argc, char** argv) {
  return graphite::cli::run(std::vector<std::string>(argv, argv + argc));
}
