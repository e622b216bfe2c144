#include "tracefix/patch/diff.hpp"

#include <algorithm>
#include <vector>

namespace tracefix::patch {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

struct Op {
  char kind;  // ' ', '-', '+'
  std::size_t a;
  std::size_t b;
};

std::string range(std::size_t start, std::size_t count) {
  // 1-based start; an empty range names the line before it.
  std::size_t shown = count == 0 ? start : start + 1;
  if (count == 1) return std::to_string(shown);
  return std::to_string(shown) + "," + std::to_string(count);
}

}  // namespace

std::string unified_diff(const std::string& before, const std::string& after,
                         const std::string& before_name, const std::string& after_name,
                         int context) {
  if (before == after) return "";
  auto a = split_lines(before);
  auto b = split_lines(after);
  const std::size_t n = a.size(), m = b.size();
  // LCS table over suffixes.
  std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
  std::vector<Op> ops;
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      ops.push_back({' ', i++, j++});
    } else if (j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j])) {
      ops.push_back({'+', i, j++});
    } else {
      ops.push_back({'-', i++, j});
    }
  }
  // Deletions before insertions within a change run reads better.
  for (std::size_t k = 0; k < ops.size();) {
    if (ops[k].kind == ' ') {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end < ops.size() && ops[end].kind != ' ') ++end;
    std::stable_partition(ops.begin() + static_cast<long>(k), ops.begin() + static_cast<long>(end),
                          [](const Op& o) { return o.kind == '-'; });
    k = end;
  }

  std::string out = "--- " + before_name + "\n+++ " + after_name + "\n";
  const auto ctx = static_cast<std::size_t>(context);
  std::size_t k = 0;
  while (k < ops.size()) {
    while (k < ops.size() && ops[k].kind == ' ') ++k;
    if (k == ops.size()) break;
    std::size_t start = k >= ctx ? k - ctx : 0;
    std::size_t end = k;
    // Extend while the gap between changes is at most 2 * context.
    for (;;) {
      while (end < ops.size() && ops[end].kind != ' ') ++end;
      std::size_t gap = end;
      while (gap < ops.size() && ops[gap].kind == ' ') ++gap;
      if (gap < ops.size() && gap - end <= 2 * ctx) {
        end = gap;
        continue;
      }
      end = std::min(ops.size(), end + ctx);
      break;
    }
    std::size_t a_start = ops[start].a, b_start = ops[start].b, a_count = 0, b_count = 0;
    std::string body;
    for (std::size_t x = start; x < end; ++x) {
      const Op& o = ops[x];
      if (o.kind != '+') ++a_count;
      if (o.kind != '-') ++b_count;
      body += o.kind;
      body += o.kind == '+' ? b[o.b] : a[o.a];
      body += '\n';
    }
    out += "@@ -" + range(a_start, a_count) + " +" + range(b_start, b_count) + " @@\n" + body;
    k = end;
  }
  return out;
}

}  // namespace tracefix::patch
