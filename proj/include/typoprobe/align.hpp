#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "typoprobe/subword.hpp"

namespace typoprobe {

// Lanczos approximation (g = 7, 9 terms) of log Gamma(x) for x > 0.
// Reentrant, unlike std::lgamma on glibc.
inline double log_gamma(double x) {
  static constexpr std::array<double, 9> kCoef = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  constexpr double kPi = 3.14159265358979323846;
  if (x < 0.5) return std::log(kPi / std::abs(std::sin(kPi * x))) - log_gamma(1.0 - x);
  x -= 1.0;
  double a = kCoef[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += kCoef[i] / (x + i);
  return kHalfLog2Pi + (x + 0.5) * std::log(t) - t + std::log(a);
}

// log P(x | alpha) of one outcome sequence with the given category counts
// under a Dirichlet-multinomial (no multinomial coefficient).
inline double dm_log_likelihood(std::span<const std::uint64_t> counts, std::span<const double> alphas) {
  if (counts.size() != alphas.size()) throw Error("dm_log_likelihood: counts and alphas differ in length");
  if (counts.size() < 2) throw Error("dm_log_likelihood: need at least two categories");
  double alpha_sum = 0.0, total = 0.0, acc = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (!(alphas[k] > 0.0)) throw Error("dm_log_likelihood: alpha must be positive");
    const auto x = static_cast<double>(counts[k]);
    alpha_sum += alphas[k];
    total += x + alphas[k];
    if (counts[k] > 0) acc += log_gamma(x + alphas[k]) - log_gamma(alphas[k]);
  }
  return log_gamma(alpha_sum) - log_gamma(total) + acc;
}

// Uniform prior alpha = 1 in every category.
inline double dm_log_likelihood(std::span<const std::uint64_t> counts) {
  std::vector<double> ones(counts.size(), 1.0);
  return dm_log_likelihood(counts, ones);
}

// Verse-level co-occurrence counts of a subword pair over the n verses the
// two translations share.
struct CooccurrenceStats {
  std::uint64_t n = 0;
  std::uint64_t n_w = 0;
  std::uint64_t n_u = 0;
  std::uint64_t n_wu = 0;

  bool valid() const { return n_wu <= n_w && n_wu <= n_u && n_w <= n && n_u <= n && n_w + n_u - n_wu <= n; }
};

enum class Eq1Mode {
  paper_literal,      // M1 likelihood uses only the n_w marginal
  full_independence,  // M1 is the product of both marginals
};

inline std::string to_string(Eq1Mode m) { return m == Eq1Mode::paper_literal ? "paper" : "full"; }

struct PairScore {
  std::uint32_t w = 0;  // subword id in the source vocabulary
  std::uint32_t u = 0;  // subword id in the target vocabulary
  CooccurrenceStats stats;
  double log_bf = 0.0;
  double score = 0.0;
};

// Log Bayes factor of the dependent model over the independent one, plus the
// 1/V prior on dependence.
inline PairScore alignment_score(const CooccurrenceStats& s, std::uint64_t vocab_size,
                                 Eq1Mode mode = Eq1Mode::full_independence) {
  if (!s.valid()) throw Error("alignment_score: inconsistent co-occurrence counts");
  if (vocab_size == 0) throw Error("alignment_score: vocabulary size must be positive");
  const std::array<std::uint64_t, 4> joint = {s.n_w - s.n_wu, s.n_u - s.n_wu, s.n_wu, s.n - (s.n_w + s.n_u - s.n_wu)};
  const std::array<std::uint64_t, 2> marg_w = {s.n_w, s.n - s.n_w};
  const std::array<std::uint64_t, 2> marg_u = {s.n_u, s.n - s.n_u};
  double independent = dm_log_likelihood(marg_w);
  if (mode == Eq1Mode::full_independence) independent += dm_log_likelihood(marg_u);
  PairScore p;
  p.stats = s;
  p.log_bf = dm_log_likelihood(joint) - independent;
  p.score = -std::log(static_cast<double>(vocab_size)) + p.log_bf;
  return p;
}

struct AlignThresholds {
  double min_score = 0.0;
  double bf_per_joint = 0.2;    // log BF > 0.2 n_wu
  double bf_slope = 0.7;        // log BF > min(cap, 0.7 n_wu)
  double bf_cap = 100.0;
};

inline bool passes_thresholds(const PairScore& p, const AlignThresholds& t = {}) {
  const auto joint = static_cast<double>(p.stats.n_wu);
  return p.score >= t.min_score && p.log_bf > t.bf_per_joint * joint && p.log_bf > std::min(t.bf_cap, t.bf_slope * joint);
}

struct AlignOptions {
  Eq1Mode mode = Eq1Mode::full_independence;
  std::uint64_t min_joint = 2;  // pairs co-occurring in fewer verses are never scored
  AlignThresholds thresholds;
};

struct Link {
  std::uint32_t src = 0;  // 0-based token position in the source verse
  std::uint32_t tgt = 0;  // 0-based token position in the target verse
  double score = 0.0;

  bool operator==(const Link&) const = default;
};

struct Alignment {
  std::string source_doculect;
  std::string target_doculect;
  std::map<VerseId, std::vector<Link>> links;  // sorted by src within a verse

  std::size_t link_count() const {
    std::size_t n = 0;
    for (const auto& [_, l] : links) n += l.size();
    return n;
  }

  // Target position linked to source token `src` in `verse`, if any.
  std::optional<std::uint32_t> target_of(const VerseId& verse, std::uint32_t src) const {
    auto it = links.find(verse);
    if (it == links.end()) return std::nullopt;
    for (const auto& l : it->second)
      if (l.src == src) return l.tgt;
    return std::nullopt;
  }
};

namespace detail {

inline std::uint64_t pair_key(std::uint32_t w, std::uint32_t u) { return (static_cast<std::uint64_t>(w) << 32) | u; }

inline std::vector<std::uint32_t> verse_subwords(const Tokens& tokens, TokenSubwordCache& cache) {
  std::vector<std::uint32_t> ids;
  for (const auto& t : tokens) {
    const auto& s = cache.get(t);
    ids.insert(ids.end(), s.begin(), s.end());
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace detail

// Type-level scores for every subword pair co-occurring in at least
// opts.min_joint shared verses.
class PairScoreTable {
 public:
  PairScoreTable(const Doculect& src, const SubwordVocab& src_vocab, const Doculect& tgt, const SubwordVocab& tgt_vocab,
                 const std::vector<VerseId>& shared, const AlignOptions& opts) {
    TokenSubwordCache src_cache(src_vocab), tgt_cache(tgt_vocab);
    std::vector<std::uint64_t> n_w(src_vocab.size()), n_u(tgt_vocab.size());
    std::unordered_map<std::uint64_t, std::uint64_t> joint;
    for (const auto& v : shared) {
      const auto ws = detail::verse_subwords(src.verses.at(v), src_cache);
      const auto us = detail::verse_subwords(tgt.verses.at(v), tgt_cache);
      for (auto w : ws) ++n_w[w];
      for (auto u : us) ++n_u[u];
      for (auto w : ws)
        for (auto u : us) ++joint[detail::pair_key(w, u)];
    }
    const auto n = static_cast<std::uint64_t>(shared.size());
    for (const auto& [key, c] : joint) {
      if (c < opts.min_joint) continue;
      const auto w = static_cast<std::uint32_t>(key >> 32);
      const auto u = static_cast<std::uint32_t>(key & 0xFFFFFFFFu);
      auto p = alignment_score({n, n_w[w], n_u[u], c}, src_vocab.size(), opts.mode);
      p.w = w;
      p.u = u;
      scores_.emplace(key, p);
    }
  }

  const PairScore* find(std::uint32_t w, std::uint32_t u) const {
    auto it = scores_.find(detail::pair_key(w, u));
    return it == scores_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return scores_.size(); }

 private:
  std::unordered_map<std::uint64_t, PairScore> scores_;
};

// Greedy token alignment: each source token goes to the target token of the
// same verse with the highest token-pair score (the best subword pair the two
// tokens contain; leftmost target wins ties), and the link is kept only if
// that best pair passes the thresholds.
inline Alignment align_pair(const Doculect& src, const SubwordVocab& src_vocab, const Doculect& tgt,
                            const SubwordVocab& tgt_vocab, const std::set<VerseId>& canonical = {},
                            const AlignOptions& opts = {}) {
  const auto shared = shared_verses(src, tgt, canonical);
  if (shared.empty()) throw Error("align_pair: " + src.id() + " and " + tgt.id() + " share no verses");
  const PairScoreTable table(src, src_vocab, tgt, tgt_vocab, shared, opts);

  Alignment out;
  out.source_doculect = src.id();
  out.target_doculect = tgt.id();
  TokenSubwordCache src_cache(src_vocab), tgt_cache(tgt_vocab);
  for (const auto& v : shared) {
    const auto& stoks = src.verses.at(v);
    const auto& ttoks = tgt.verses.at(v);
    std::vector<const std::vector<std::uint32_t>*> tsubs;
    tsubs.reserve(ttoks.size());
    for (const auto& t : ttoks) tsubs.push_back(&tgt_cache.get(t));
    std::vector<Link> links;
    for (std::uint32_t i = 0; i < stoks.size(); ++i) {
      const auto& ssubs = src_cache.get(stoks[i]);
      const PairScore* best = nullptr;
      std::uint32_t best_j = 0;
      for (std::uint32_t j = 0; j < ttoks.size(); ++j) {
        const PairScore* tok_best = nullptr;
        for (auto w : ssubs)
          for (auto u : *tsubs[j])
            if (const auto* p = table.find(w, u); p && (!tok_best || p->score > tok_best->score)) tok_best = p;
        if (tok_best && (!best || tok_best->score > best->score)) {
          best = tok_best;
          best_j = j;
        }
      }
      if (best && passes_thresholds(*best, opts.thresholds)) links.push_back({i, best_j, best->score});
    }
    if (!links.empty()) out.links.emplace(v, std::move(links));
  }
  return out;
}

// Dump format: `verse_id\tsrc_idx\ttgt_idx\tscore`, one line per link.
inline void write_alignment(const std::string& path, const Alignment& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "# " << a.source_doculect << '\t' << a.target_doculect << '\n';
  for (const auto& [verse, links] : a.links)
    for (const auto& l : links) out << verse << '\t' << l.src << '\t' << l.tgt << '\t' << text::format_double(l.score) << '\n';
}

inline Alignment read_alignment(const std::string& path) {
  auto in = text::open_input(path);
  Alignment a;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(std::move(line));
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (lineno == 1) {
        auto f = text::split(text::trim(std::string_view(line).substr(1)), '\t');
        if (f.size() == 2) {
          a.source_doculect = f[0];
          a.target_doculect = f[1];
        }
      }
      continue;
    }
    auto f = text::split(line, '\t');
    if (f.size() != 4) throw ParseError(path, lineno, "expected 4 columns");
    Link l;
    l.src = static_cast<std::uint32_t>(text::parse_int(f[1], path, lineno));
    l.tgt = static_cast<std::uint32_t>(text::parse_int(f[2], path, lineno));
    l.score = text::parse_double(f[3], path, lineno);
    a.links[f[0]].push_back(l);
  }
  return a;
}

}  // namespace typoprobe
