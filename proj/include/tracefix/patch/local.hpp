// Single-location template generators.
#pragma once

#include <string>
#include <vector>

#include "tracefix/faultloc/localize.hpp"
#include "tracefix/interp/trace.hpp"
#include "tracefix/patch/edit.hpp"

namespace tracefix::patch {

inline constexpr int kMaxPatchesPerLocation = 200;

// Template names in generation order.
const std::vector<std::string>& local_templates();

// Statement a location designates in `program`, or -1.
int location_stmt(const lang::Program& program, const faultloc::RepairLocation& location);

// Single-edit candidates for one location. `trace` (a run of `program`)
// supplies runtime value kinds for variable substitution and guards; it may
// be null. Every returned patch applies to `program`, and no two produce the
// same patched text.
std::vector<Patch> generate_local(const lang::Program& program,
                                  const faultloc::RepairLocation& location,
                                  const interp::ExecutionTrace* trace,
                                  int cap = kMaxPatchesPerLocation);

// Runtime kinds of the variables of `frame` at trace event `idx`.
std::map<std::string, interp::Value::Kind> variable_kinds(const interp::ExecutionTrace& trace,
                                                          int idx);

// Guard conditions for wrapping `stmt`: nonzero divisors, nonzero and
// nonnegative integers, in-bounds indices and nonempty arrays. Variables of
// unknown kind are assumed to be integers.
std::vector<lang::Expr> guard_expressions(const lang::Stmt& stmt,
                                          const std::map<std::string, interp::Value::Kind>& kinds);

// `e + delta` with constant folding (`n - 1` + 1 is `n`).
lang::Expr offset_expr(const lang::Expr& e, std::int64_t delta);

}  // namespace tracefix::patch
