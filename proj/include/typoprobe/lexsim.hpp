#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "typoprobe/levenshtein.hpp"
#include "typoprobe/parallel.hpp"
#include "typoprobe/project.hpp"
#include "typoprobe/random.hpp"
#include "typoprobe/representation.hpp"

namespace typoprobe {

struct WordList {
  std::string language;
  std::map<std::string, std::set<std::string>> entries;  // concept -> forms
};

// `iso639_3\tconcept\tform`; several varieties of one language pool their forms.
inline std::map<std::string, WordList> read_wordlists(const std::string& path) {
  auto in = text::open_input(path);
  std::map<std::string, WordList> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(std::move(line));
    if (line.empty() || line[0] == '#') continue;
    auto f = text::split(line, '\t');
    if (f.size() != 3) throw ParseError(path, lineno, "expected 3 columns");
    if (f[2].empty()) throw ParseError(path, lineno, "empty form");
    auto& wl = out[f[0]];
    wl.language = f[0];
    wl.entries[f[1]].insert(f[2]);
  }
  return out;
}

inline void write_wordlists(const std::string& path, const std::map<std::string, WordList>& lists) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (const auto& [lang, wl] : lists)
    for (const auto& [concept_id, forms] : wl.entries)
      for (const auto& f : forms) out << lang << '\t' << concept_id << '\t' << f << '\n';
}

// Drops lists with fewer than `min_concepts` concepts.
inline std::map<std::string, WordList> complete_wordlists(std::map<std::string, WordList> lists,
                                                          std::size_t min_concepts = 30) {
  for (auto it = lists.begin(); it != lists.end();)
    it = it->second.entries.size() < min_concepts ? lists.erase(it) : std::next(it);
  return lists;
}

struct LexsimOptions {
  std::size_t max_cross_pairs = 10000;
  std::uint64_t seed = 1;
};

// Mean same-concept NLD (per concept over all form pairs, then averaged over
// shared concepts) divided by the mean NLD over pairs of forms with different
// shared concepts. The denominator is exact up to `max_cross_pairs` pairs and
// estimated from a seeded sample beyond that.
inline double asjp_distance(const WordList& x, const WordList& y, const LexsimOptions& opts = {}) {
  const bool swap = y.language < x.language;
  const WordList& a = swap ? y : x;
  const WordList& b = swap ? x : y;
  std::vector<std::vector<std::u32string>> fa, fb;
  for (const auto& [c, forms] : a.entries) {
    auto it = b.entries.find(c);
    if (it == b.entries.end() || forms.empty() || it->second.empty()) continue;
    fa.emplace_back();
    fb.emplace_back();
    for (const auto& f : forms) fa.back().push_back(text::to_u32(f));
    for (const auto& f : it->second) fb.back().push_back(text::to_u32(f));
  }
  if (fa.empty()) throw Error("asjp_distance: " + a.language + " and " + b.language + " share no concepts");
  if (fa.size() < 2) throw Error("asjp_distance: " + a.language + " and " + b.language + " share only one concept");

  double same = 0.0;
  for (std::size_t c = 0; c < fa.size(); ++c) {
    double s = 0.0;
    for (const auto& u : fa[c])
      for (const auto& v : fb[c]) s += nld(u, v);
    same += s / static_cast<double>(fa[c].size() * fb[c].size());
  }
  same /= static_cast<double>(fa.size());

  std::size_t total_a = 0, total_b = 0, same_pairs = 0;
  for (std::size_t c = 0; c < fa.size(); ++c) {
    total_a += fa[c].size();
    total_b += fb[c].size();
    same_pairs += fa[c].size() * fb[c].size();
  }
  const std::size_t cross_pairs = total_a * total_b - same_pairs;
  double cross = 0.0;
  if (cross_pairs <= opts.max_cross_pairs) {
    for (std::size_t c1 = 0; c1 < fa.size(); ++c1)
      for (std::size_t c2 = 0; c2 < fb.size(); ++c2) {
        if (c1 == c2) continue;
        for (const auto& u : fa[c1])
          for (const auto& v : fb[c2]) cross += nld(u, v);
      }
    cross /= static_cast<double>(cross_pairs);
  } else {
    std::vector<std::pair<std::size_t, std::size_t>> flat_a, flat_b;  // (concept, form)
    for (std::size_t c = 0; c < fa.size(); ++c)
      for (std::size_t k = 0; k < fa[c].size(); ++k) flat_a.emplace_back(c, k);
    for (std::size_t c = 0; c < fb.size(); ++c)
      for (std::size_t k = 0; k < fb[c].size(); ++k) flat_b.emplace_back(c, k);
    auto g = rng::stream(opts.seed, a.language + '\t' + b.language);
    std::size_t drawn = 0;
    while (drawn < opts.max_cross_pairs) {
      const auto& [ca, ka] = flat_a[rng::uniform_index(g, flat_a.size())];
      const auto& [cb, kb] = flat_b[rng::uniform_index(g, flat_b.size())];
      if (ca == cb) continue;
      cross += nld(fa[ca][ka], fb[cb][kb]);
      ++drawn;
    }
    cross /= static_cast<double>(drawn);
  }
  if (cross <= 0.0) throw Error("asjp_distance: cross-concept forms of " + a.language + " and " + b.language + " are identical");
  return same / cross;
}

struct DistanceMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd values;
};

inline DistanceMatrix distance_matrix(const std::vector<WordList>& lists, const LexsimOptions& opts = {},
                                      std::size_t jobs = 1) {
  DistanceMatrix m;
  const auto n = lists.size();
  for (const auto& l : lists) m.ids.push_back(l.language);
  m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  parallel_for(pairs.size(), jobs, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const double d = asjp_distance(lists[i], lists[j], opts);
    m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
    m.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d;
  });
  return m;
}

inline void write_distance_matrix(const std::string& path, const DistanceMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "id";
  for (const auto& id : m.ids) out << '\t' << id;
  out << '\n';
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    out << m.ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) out << '\t' << text::format_double(m.values(i, j));
    out << '\n';
  }
}

// Rows of U_k * Sigma_k. Each singular vector's largest-magnitude entry is
// made positive.
inline Eigen::MatrixXd svd_embedding(const Eigen::MatrixXd& a, std::size_t k) {
  if (k == 0 || k > static_cast<std::size_t>(std::min(a.rows(), a.cols())))
    throw Error("truncated_svd: k=" + std::to_string(k) + " exceeds matrix size " + std::to_string(a.rows()));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  Eigen::MatrixXd u = svd.matrixU().leftCols(static_cast<Eigen::Index>(k));
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index arg = 0;
    u.col(c).cwiseAbs().maxCoeff(&arg);
    if (u(arg, c) < 0) u.col(c) *= -1.0;
  }
  return u * svd.singularValues().head(static_cast<Eigen::Index>(k)).asDiagonal();
}

inline RepresentationSet truncated_svd(const DistanceMatrix& m, std::size_t k = 100, std::string set_id = "lexical") {
  const auto emb = svd_embedding(m.values, k);
  RepresentationSet r;
  r.id = std::move(set_id);
  r.dim = k;
  for (std::size_t i = 0; i < m.ids.size(); ++i) {
    std::vector<double> v(k);
    for (std::size_t c = 0; c < k; ++c) v[c] = emb(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    r.add(m.ids[i], std::move(v));
  }
  return r;
}

// Word list of a doculect from its projected concepts: the forms of every
// token that carries a concept.
inline WordList projected_wordlist(const ProjectedDoculect& p) {
  WordList wl;
  wl.language = p.doculect_id;
  for (const auto& [_, toks] : p.verses)
    for (const auto& t : toks)
      if (t.concept_id && !t.form.empty()) wl.entries[*t.concept_id].insert(t.form);
  return wl;
}

// Corpus-based stand-in for a lexical baseline: the ASJP-style ratio over
// forms grouped by projected concepts.
inline double corpus_lexical_distance(const ProjectedDoculect& a, const ProjectedDoculect& b,
                                      const LexsimOptions& opts = {}) {
  return asjp_distance(projected_wordlist(a), projected_wordlist(b), opts);
}

}  // namespace typoprobe
