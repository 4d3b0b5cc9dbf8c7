#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "typoprobe/text.hpp"

namespace typoprobe {

inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(text::to_u32(a), text::to_u32(b));
}

enum class NldNorm { max_len, sum_len };

// Levenshtein distance over code points, divided by the longer length or by
// the summed length.
inline double nld(std::u32string_view a, std::u32string_view b, NldNorm norm = NldNorm::max_len) {
  if (a.empty() || b.empty()) throw Error("nld: empty string");
  const double d = static_cast<double>(levenshtein(a, b));
  const double denom = norm == NldNorm::max_len ? static_cast<double>(std::max(a.size(), b.size()))
                                                 : static_cast<double>(a.size() + b.size());
  return d / denom;
}

inline double nld(std::string_view a, std::string_view b, NldNorm norm = NldNorm::max_len) {
  return nld(text::to_u32(a), text::to_u32(b), norm);
}

enum class EditOp { substitute, remove, insert };

// One non-matching step of an edit script turning `a` into `b`. For
// insertions `pos_a` is the gap index in `a` (0..|a|); for deletions `pos_b`
// is the gap index in `b`.
struct Edit {
  EditOp op;
  std::size_t pos_a;
  std::size_t pos_b;
};

// A minimal edit script. Backtracking prefers match/substitution, then
// deletion, then insertion, so the script is deterministic.
inline std::vector<Edit> edit_script(std::u32string_view a, std::u32string_view b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::uint32_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<std::uint32_t>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      at(i, j) = std::min({at(i - 1, j) + 1, at(i, j - 1) + 1, at(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0u : 1u)});
  std::vector<Edit> out;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0u : 1u)) {
      if (a[i - 1] != b[j - 1]) out.push_back({EditOp::substitute, i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      out.push_back({EditOp::remove, i - 1, j});
      --i;
    } else {
      out.push_back({EditOp::insert, i, j - 1});
      --j;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace typoprobe
