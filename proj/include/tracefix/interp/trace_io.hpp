// Line-oriented text format for traces, one event per line with
// tab-separated fields, followed by an END record for the outcome.
#pragma once

#include <stdexcept>
#include <string>

#include "tracefix/interp/trace.hpp"

namespace tracefix::interp {

class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(int line, const std::string& message)
      : std::runtime_error("trace line " + std::to_string(line) + ": " + message) {}
};

std::string serialize_trace(const ExecutionTrace& trace);

// Inverse of serialize_trace. Throws TraceFormatError.
ExecutionTrace parse_trace(const std::string& text);

}  // namespace tracefix::interp
