#pragma once

#include <string>

namespace tracefix::patch {

// Unified diff of two texts (line based). Empty when equal.
std::string unified_diff(const std::string& before, const std::string& after,
                         const std::string& before_name = "a/program.ml0",
                         const std::string& after_name = "b/program.ml0", int context = 3);

}  // namespace tracefix::patch
