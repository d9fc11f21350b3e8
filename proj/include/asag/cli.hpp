#pragma once

#include <string>
#include <vector>

namespace asag::cli {

// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
int run(const std::vector<std::string>& args);

}  // namespace asag::cli
