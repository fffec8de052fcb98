// Batch front door.  `dispatch` is the whole CLI as a function so that tests
// can drive subcommands in-process and compare artifacts byte for byte.
//
// Exit codes: 0 success, 2 invalid configuration or input, 3 internal failure,
// 64 unknown subcommand (usage goes to the error stream).
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace badflow {

std::string usage();

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(const std::vector<std::string>& args);  // stdout / stderr

}  // namespace badflow
