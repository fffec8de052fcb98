#include <string>
#include <vector>

#include "badflow/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return badflow::dispatch(args);
}
