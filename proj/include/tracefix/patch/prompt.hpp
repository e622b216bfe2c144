// Prompt documents for an external patch generator, and parsing of its
// replies.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tracefix/faultloc/localize.hpp"
#include "tracefix/patch/edit.hpp"
#include "tracefix/snapshot/snapshot.hpp"

namespace tracefix::patch {

inline constexpr std::size_t kMaxPromptChars = 16000;
inline constexpr int kTraceExcerptStatements = 50;

struct PromptSection {
  std::string title;
  std::string body;
};

struct PromptDocument {
  std::vector<PromptSection> sections;

  bool has_section(const std::string& title) const;
  const PromptSection* section(const std::string& title) const;
  std::string render() const;
};

// What a previous candidate did when its patched program was run.
struct AttemptFeedback {
  Patch patch;
  bool resolved = false;
  interp::Outcome outcome;
};

PromptDocument build_prompt(const snapshot::DebugSnapshot& snapshot,
                            const interp::ExecutionTrace& trace,
                            const lang::Program& program,
                            const faultloc::RepairLocation& location,
                            const std::vector<AttemptFeedback>& history,
                            const std::string& guidance = "");

class NoCandidates : public std::runtime_error {
 public:
  NoCandidates(const std::string& message, std::vector<std::string> diagnostics)
      : std::runtime_error(message), diagnostics_(std::move(diagnostics)) {}
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

struct ReplyParse {
  std::vector<Patch> patches;
  std::vector<std::string> diagnostics;
};

// Each fenced code block is read as a replacement function or a single
// replacement statement for the location. Throws NoCandidates when no block
// yields a patch.
ReplyParse parse_generator_reply(const std::string& text, const lang::Program& program,
                                 const faultloc::RepairLocation& location);

// Runs the command named by REPAIR_LLM_CMD with `prompt` on standard input
// and returns its standard output; nullopt when the variable is unset or
// the command fails. Calls are serialized.
std::optional<std::string> call_external_generator(const std::string& prompt);

// Name of the external generator command, if configured.
std::optional<std::string> external_generator_command();

}  // namespace tracefix::patch
