#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "typoprobe/corpus.hpp"

namespace typoprobe {

struct SubwordOptions {
  std::size_t max_length = 0;  // in code points; 0 means unlimited
};

// Subwords of one doculect: token substrings strictly more frequent than
// every substring containing them. Ids index into `subwords`, which is sorted.
struct SubwordVocab {
  std::string doculect_id;
  std::vector<std::string> subwords;
  std::vector<std::uint64_t> frequency;  // token-occurrence frequency
  std::unordered_map<std::string, std::uint32_t> index;

  std::size_t size() const { return subwords.size(); }
  bool contains(const std::string& s) const { return index.count(s) != 0; }

  std::optional<std::uint32_t> id(const std::string& s) const {
    auto it = index.find(s);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

namespace detail {

struct U32Hash {
  std::size_t operator()(const std::u32string& s) const noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char32_t c : s) {
      h ^= static_cast<std::uint64_t>(c);
      h *= 0x100000001B3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

inline std::unordered_map<std::string, std::uint64_t> token_counts(const Doculect& d) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& [_, tokens] : d.verses)
    for (const auto& t : tokens) ++counts[t];
  return counts;
}

}  // namespace detail

// Frequency of a substring is the number of positions at which it occurs,
// summed over all token occurrences. Frequency can only drop when a string
// is extended, so comparing against single-character extensions is enough
// to decide strict maximality against every superstring.
inline SubwordVocab extract_subwords(const Doculect& doculect, const SubwordOptions& opts = {}) {
  if (doculect.verses.empty()) throw Error("extract_subwords: doculect '" + doculect.id() + "' has no verses");
  std::unordered_map<std::u32string, std::uint64_t, detail::U32Hash> freq;
  for (const auto& [token, count] : detail::token_counts(doculect)) {
    const auto cps = text::to_u32(token);
    const auto n = cps.size();
    const auto cap = opts.max_length ? std::min(opts.max_length, n) : n;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t len = 1; len <= cap && i + len <= n; ++len) freq[cps.substr(i, len)] += count;
  }

  std::unordered_map<std::u32string, std::uint64_t, detail::U32Hash> best_extension;
  best_extension.reserve(freq.size());
  for (const auto& [s, f] : freq) {
    if (s.size() < 2) continue;
    for (const auto& parent : {s.substr(1), s.substr(0, s.size() - 1)}) {
      auto& e = best_extension[parent];
      e = std::max(e, f);
    }
  }

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [s, f] : freq) {
    auto it = best_extension.find(s);
    const std::uint64_t ext = it == best_extension.end() ? 0 : it->second;
    if (f > ext) kept.emplace_back(text::to_utf8(s), f);
  }
  std::sort(kept.begin(), kept.end());

  SubwordVocab vocab;
  vocab.doculect_id = doculect.id();
  vocab.subwords.reserve(kept.size());
  vocab.frequency.reserve(kept.size());
  for (auto& [s, f] : kept) {
    vocab.index.emplace(s, static_cast<std::uint32_t>(vocab.subwords.size()));
    vocab.subwords.push_back(std::move(s));
    vocab.frequency.push_back(f);
  }
  return vocab;
}

// Sorted, de-duplicated ids of the vocabulary subwords occurring in `token`.
inline std::vector<std::uint32_t> subwords_in_token(const std::string& token, const SubwordVocab& vocab) {
  const auto cps = text::to_u32(token);
  std::vector<std::uint32_t> ids;
  for (std::size_t i = 0; i < cps.size(); ++i)
    for (std::size_t len = 1; i + len <= cps.size(); ++len)
      if (auto id = vocab.id(text::to_utf8(cps.substr(i, len)))) ids.push_back(*id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

// Caches subwords_in_token per token type.
class TokenSubwordCache {
 public:
  explicit TokenSubwordCache(const SubwordVocab& vocab) : vocab_(&vocab) {}

  const std::vector<std::uint32_t>& get(const std::string& token) {
    auto it = cache_.find(token);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(token, subwords_in_token(token, *vocab_)).first->second;
  }

 private:
  const SubwordVocab* vocab_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> cache_;
};

// For each subword, the verses (restricted to `canonical` when non-empty) in
// which it occurs inside at least one token.
inline std::map<std::string, std::set<VerseId>> occurrence_sets(const Doculect& doculect, const SubwordVocab& vocab,
                                                                const std::set<VerseId>& canonical = {}) {
  std::map<std::string, std::set<VerseId>> out;
  for (const auto& s : vocab.subwords) out[s];
  TokenSubwordCache cache(vocab);
  for (const auto& [verse, tokens] : doculect.verses) {
    if (!canonical.empty() && !canonical.count(verse)) continue;
    for (const auto& t : tokens)
      for (auto id : cache.get(t)) out[vocab.subwords[id]].insert(verse);
  }
  return out;
}

// Vocabulary dump: `subword\tverse_count`, in vocabulary order.
inline void write_vocab(const std::string& path, const SubwordVocab& vocab,
                        const std::map<std::string, std::set<VerseId>>& occurrence) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (const auto& s : vocab.subwords) {
    auto it = occurrence.find(s);
    out << s << '\t' << (it == occurrence.end() ? 0 : it->second.size()) << '\n';
  }
}

}  // namespace typoprobe
