#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace edgestates::cli {

// Entry point of the edgestates tool; returns the process exit status.
// 0 success, 1 module error (error.json written), 2 usage or config error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_hex(const std::string& data);

}  // namespace edgestates::cli
