#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ulc::cli {

// Exit status: 0 pass/yes, 1 fail/no, 2 unsupported or error.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace ulc::cli
