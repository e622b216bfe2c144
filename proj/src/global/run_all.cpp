#include <algorithm>
#include <future>
#include <set>

#include "tracefix/global/global.hpp"
#include "tracefix/patch/local.hpp"

namespace tracefix::global {

std::vector<patch::Patch> merge_candidates(std::vector<std::vector<patch::Patch>> outputs) {
  struct Item {
    patch::Patch patch;
    std::size_t generator;
    std::size_t index;
  };
  std::vector<Item> items;
  for (std::size_t g = 0; g < outputs.size(); ++g)
    for (std::size_t i = 0; i < outputs[g].size(); ++i) items.push_back({std::move(outputs[g][i]), g, i});
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.patch.strategy != b.patch.strategy) return a.patch.strategy < b.patch.strategy;
    if (a.generator != b.generator) return a.generator < b.generator;
    return a.index < b.index;
  });
  std::vector<patch::Patch> out;
  std::set<std::string> keys;
  for (auto& it : items)
    if (keys.insert(patch::edit_set_key(it.patch)).second) out.push_back(std::move(it.patch));
  return out;
}

RunAllResult run_all_generators(const validate::Validator& v, const RunAllOptions& options) {
  options.search.check();
  RunAllResult out;
  std::vector<faultloc::RepairLocation> locs;
  try {
    locs = faultloc::localize(localization_snapshot(v), v.original_trace(), v.program());
  } catch (const faultloc::SymptomNotInTrace&) {
    return out;
  }
  const lang::Program& program = v.program();
  const interp::ExecutionTrace& trace = v.original_trace();

  auto local = std::async(std::launch::async, [&] {
    std::vector<patch::Patch> all;
    for (const auto& loc : locs)
      for (auto& p : patch::generate_local(program, loc, &trace)) all.push_back(std::move(p));
    return all;
  });
  auto patterns = std::async(std::launch::async, [&] {
    PatternContext ctx{&trace, locs};
    std::vector<patch::Patch> all;
    for (const auto& loc : locs)
      for (auto& p : pattern_patches(program, loc, ctx)) all.push_back(std::move(p));
    return all;
  });
  auto simultaneous = std::async(std::launch::async, [&] {
    std::vector<patch::Patch> all;
    for (const auto& loc : locs) {
      auto siblings = sibling_locations(program, loc);
      if (siblings.empty()) continue;
      auto seeds = patch::generate_local(program, loc, &trace, options.transplant_seeds);
      for (const auto& seed : seeds)
        for (auto& p : simultaneous_repair(program, seed, siblings).patches) all.push_back(std::move(p));
    }
    return all;
  });
  auto iterative = std::async(std::launch::async, [&] { return iterative_repair(v, options.search, options.workers); });

  std::vector<std::vector<patch::Patch>> outputs;
  outputs.push_back(local.get());
  outputs.push_back(patterns.get());
  outputs.push_back(simultaneous.get());
  SearchResult it = iterative.get();
  out.budget_exhausted = it.budget_exhausted;
  outputs.push_back(std::move(it.patches));
  out.patches = merge_candidates(std::move(outputs));
  return out;
}

}  // namespace tracefix::global
